#ifndef RFFSVM_RFFSVM_HPP
#define RFFSVM_RFFSVM_HPP

#include "rffsvm/core.hpp"
#include "rffsvm/dataset.hpp"
#include "rffsvm/kernels.hpp"
#include "rffsvm/model_io.hpp"
#include "rffsvm/normalizer.hpp"
#include "rffsvm/pipeline.hpp"
#include "rffsvm/random_features.hpp"
#include "rffsvm/report.hpp"
#include "rffsvm/svm.hpp"

#endif  // RFFSVM_RFFSVM_HPP
