// Copyright 2026 The cvcluster Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CVC_TESTS_TEST_UTIL_H
#define CVC_TESTS_TEST_UTIL_H

#include <random>

#include "cvc/common.h"

namespace cvc::test_util {

inline std::mt19937_64 independent_rng() {
    std::random_device rd;
    return std::mt19937_64(rd());
}

template <typename A, typename B>
double max_abs_diff(const A &a, const B &b) {
    return (a - b).cwiseAbs().maxCoeff();
}

inline CVec random_state(int d, int support, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    CVec v = CVec::Zero(d);
    for (int k = 0; k < support; ++k) v(k) = cplx(g(rng), g(rng)) * std::exp(-0.3 * k);
    return v / v.norm();
}

}  // namespace cvc::test_util

#endif
