#pragma once

#include "voroblocks/clusters.hpp"
#include "voroblocks/coalesce.hpp"
#include "voroblocks/errors.hpp"
#include "voroblocks/geometry.hpp"
#include "voroblocks/io.hpp"
#include "voroblocks/oracle.hpp"
#include "voroblocks/pipeline.hpp"
#include "voroblocks/posterior.hpp"
#include "voroblocks/random.hpp"
#include "voroblocks/synthetic.hpp"
