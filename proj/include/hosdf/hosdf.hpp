#pragma once

#include "hosdf/bspline.hpp"
#include "hosdf/error.hpp"
#include "hosdf/finite_differences.hpp"
#include "hosdf/grid.hpp"
#include "hosdf/heaviside.hpp"
#include "hosdf/marching_cubes.hpp"
#include "hosdf/mesh_io.hpp"
#include "hosdf/metaimage.hpp"
#include "hosdf/morphometry.hpp"
#include "hosdf/narrowband.hpp"
#include "hosdf/norms.hpp"
#include "hosdf/phantom.hpp"
#include "hosdf/phases.hpp"
#include "hosdf/pipeline.hpp"
#include "hosdf/quadrature.hpp"
#include "hosdf/smoothing.hpp"
#include "hosdf/study.hpp"
#include "hosdf/sweep.hpp"
