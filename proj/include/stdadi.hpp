#pragma once

#include "stdadi/analytic.hpp"
#include "stdadi/enumeration.hpp"
#include "stdadi/errors.hpp"
#include "stdadi/featurize.hpp"
#include "stdadi/invariants.hpp"
#include "stdadi/skeleton_io.hpp"
#include "stdadi/spline.hpp"
#include "stdadi/transforms.hpp"
#include "stdadi/verify.hpp"
