#pragma once

#include "reggeflow/complex.hpp"
#include "reggeflow/curvature.hpp"
#include "reggeflow/errors.hpp"
#include "reggeflow/flow.hpp"
#include "reggeflow/geometry.hpp"
#include "reggeflow/mesh_io.hpp"
#include "reggeflow/models.hpp"
