#pragma once

#include "voxsc/camera.hpp"
#include "voxsc/config.hpp"
#include "voxsc/consistency.hpp"
#include "voxsc/errors.hpp"
#include "voxsc/io.hpp"
#include "voxsc/losses.hpp"
#include "voxsc/math.hpp"
#include "voxsc/optim.hpp"
#include "voxsc/oracle.hpp"
#include "voxsc/parallel.hpp"
#include "voxsc/shapes.hpp"
#include "voxsc/voxel.hpp"
