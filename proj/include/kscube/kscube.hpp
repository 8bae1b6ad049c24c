#pragma once

#include "kscube/bounds.hpp"
#include "kscube/config.hpp"
#include "kscube/cut_cone.hpp"
#include "kscube/embeddings.hpp"
#include "kscube/errors.hpp"
#include "kscube/function_table.hpp"
#include "kscube/json_io.hpp"
#include "kscube/ks_inequality.hpp"
#include "kscube/matrix_point.hpp"
#include "kscube/metric_space.hpp"
#include "kscube/rational.hpp"
#include "kscube/repro.hpp"
#include "kscube/simplex.hpp"
#include "kscube/summation.hpp"
#include "kscube/walsh.hpp"
