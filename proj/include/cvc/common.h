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

#ifndef CVC_COMMON_H
#define CVC_COMMON_H

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cvc {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt2 = std::numbers::sqrt2;

// Error categories map onto CLI exit codes.
enum class ErrorKind { Usage, Numeric, Validation, Singular };

class Error : public std::runtime_error {
   public:
    Error(ErrorKind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

   private:
    ErrorKind kind_;
};

inline Error usage_error(const std::string &msg) { return Error(ErrorKind::Usage, msg); }
inline Error numeric_error(const std::string &msg) { return Error(ErrorKind::Numeric, msg); }
inline Error validation_error(const std::string &msg) { return Error(ErrorKind::Validation, msg); }

class SingularConfiguration : public Error {
   public:
    SingularConfiguration(double theta_h, double theta_l)
        : Error(ErrorKind::Singular, "singular measurement angles (" + std::to_string(theta_h) + ", " +
                                         std::to_string(theta_l) + ")"),
          theta_h(theta_h),
          theta_l(theta_l) {}
    double theta_h;
    double theta_l;
};

}  // namespace cvc

#endif
