#pragma once

#include "tempus/adapter.hpp"
#include "tempus/aggregate.hpp"
#include "tempus/construct.hpp"
#include "tempus/error.hpp"
#include "tempus/gaps.hpp"
#include "tempus/interval.hpp"
#include "tempus/io.hpp"
#include "tempus/rolling.hpp"
#include "tempus/table.hpp"
#include "tempus/time.hpp"
#include "tempus/verbs.hpp"
