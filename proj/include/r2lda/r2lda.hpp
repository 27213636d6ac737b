#pragma once

#include "r2lda/errors.hpp"
#include "r2lda/linalg.hpp"
#include "r2lda/class_stats.hpp"
#include "r2lda/reg_select.hpp"
#include "r2lda/classifiers.hpp"
#include "r2lda/random.hpp"
#include "r2lda/datasets.hpp"
#include "r2lda/harness.hpp"
#include "r2lda/io.hpp"
