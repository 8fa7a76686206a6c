#ifndef DFD_DFD_HPP
#define DFD_DFD_HPP

#include "dfd/blur_math.hpp"
#include "dfd/config.hpp"
#include "dfd/edges.hpp"
#include "dfd/errors.hpp"
#include "dfd/experiment.hpp"
#include "dfd/image_ops.hpp"
#include "dfd/io.hpp"
#include "dfd/pipeline.hpp"
#include "dfd/raster.hpp"

#endif  // DFD_DFD_HPP
