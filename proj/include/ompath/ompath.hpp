#pragma once

#include "ompath/errors.hpp"
#include "ompath/experiments.hpp"
#include "ompath/holder.hpp"
#include "ompath/io.hpp"
#include "ompath/model.hpp"
#include "ompath/om.hpp"
#include "ompath/optimize.hpp"
#include "ompath/path.hpp"
#include "ompath/simulate.hpp"
#include "ompath/tube.hpp"
