#pragma once

#include "melostyle/agreement.hpp"
#include "melostyle/audio.hpp"
#include "melostyle/config.hpp"
#include "melostyle/contour.hpp"
#include "melostyle/csv.hpp"
#include "melostyle/errors.hpp"
#include "melostyle/features.hpp"
#include "melostyle/histogram.hpp"
#include "melostyle/io.hpp"
#include "melostyle/report.hpp"
#include "melostyle/stats.hpp"
#include "melostyle/synthcorpus.hpp"
#include "melostyle/types.hpp"
