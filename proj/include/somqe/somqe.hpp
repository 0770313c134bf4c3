#pragma once

#include "somqe/analysis.hpp"
#include "somqe/errors.hpp"
#include "somqe/features.hpp"
#include "somqe/image.hpp"
#include "somqe/random.hpp"
#include "somqe/report.hpp"
#include "somqe/series.hpp"
#include "somqe/som.hpp"
