// Copyright 2026 The qspam developers
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

#pragma once

#include <stdexcept>
#include <string>

namespace qspam {

/** Base class for all qspam exceptions. */
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/** A probability vector or confusion-matrix column fails positivity or
 *  does not sum to 1 within the active tolerance. */
class NormalizationViolation : public Error {
 public:
  using Error::Error;
};

/** Heralded initialization has zero acceptance probability. */
class HeraldImpossible : public Error {
 public:
  using Error::Error;
};

/** Random-model error scale would break column normalization. */
class ScaleTooLarge : public Error {
 public:
  using Error::Error;
};

/** Depolarizing parameter p = 1 has no inverse map. */
class DivergentInverse : public Error {
 public:
  using Error::Error;
};

/** A gauge transformation would push some model entry negative. */
class GaugeInfeasible : public Error {
 public:
  using Error::Error;
};

/** An estimate is too far outside the positive orthant to repair by
 *  clipping. */
class InfeasibleEstimate : public Error {
 public:
  using Error::Error;
};

/** A level index is outside {0, ..., d-1} or otherwise malformed. */
class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

/** Requested a first-order row for the dominant outcome pi(0), which
 *  carries no first-order information. */
class DominantOutcome : public Error {
 public:
  using Error::Error;
};

/** Design matrix rank is below the learnable-subspace dimension. */
class RankDeficientDesign : public Error {
 public:
  using Error::Error;
};

/** No counts records were supplied to the estimator. */
class EmptyCounts : public Error {
 public:
  using Error::Error;
};

/** Operation requires a different qudit dimension than the input has. */
class WrongDimension : public Error {
 public:
  using Error::Error;
};

/** Too few positive decay points remain to fit an exponential. */
class NonPositiveData : public Error {
 public:
  using Error::Error;
};

/** SPAM-factor interval extends to or below 1/2; dividing by it would
 *  not produce a meaningful eigenvalue bound. */
class DivisionUnstable : public Error {
 public:
  using Error::Error;
};

/** An aggregate needs the full label set but some labels are missing. */
class IncompleteSet : public Error {
 public:
  using Error::Error;
};

/** Malformed run configuration or input file. */
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

}  // namespace qspam
