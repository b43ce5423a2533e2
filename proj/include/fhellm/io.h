/* Copyright (C) 2026 The fhellm Authors
 * This program is Licensed under the Apache License, Version 2.0
 * (the "License"); you may not use this file except in compliance
 * with the License. You may obtain a copy of the License at
 *   http://www.apache.org/licenses/LICENSE-2.0
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License. See accompanying LICENSE file.
 */
#ifndef FHELLM_IO_H
#define FHELLM_IO_H
/**
 * @file io.h
 * @brief JSON and CSV serialization of parameters, ledgers, polynomials,
 * SOS trees, matrices and cost reports.
 */
#include <string>

#include <json.hpp>

#include "fhellm/packing.h"
#include "fhellm/pipeline.h"
#include "fhellm/polyapprox.h"
#include "fhellm/slotsim.h"
#include "fhellm/sospoly.h"

namespace fhellm {

using Json = nlohmann::ordered_json;

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

Json to_json(const SimParams& p);
//! Missing keys keep their defaults; "noise_bits": null means exact mode.
SimParams sim_params_from_json(const Json& j);
SimParams load_sim_params(const std::string& path);

Json to_json(const CostLedger& c);
CostLedger cost_ledger_from_json(const Json& j);

//! {basis, interval: [lo, hi], coeffs, target}
Json to_json(const ApproxPoly& p);
ApproxPoly approx_poly_from_json(const Json& j);

//! Per-level node coefficient arrays, pairing constants and scores.
Json to_json(const SosTree& t);
SosTree sos_tree_from_json(const Json& j);

//! Per phase: ct_rotations, cc_mults, pc_mults, rescales, bootstraps,
//! levels; plus a total.
Json to_json(const CostReport& r);

Json matrix_to_json(const ClearMatrix& m);
ClearMatrix matrix_from_json(const Json& j);
std::string matrix_to_csv(const ClearMatrix& m);
ClearMatrix matrix_from_csv(const std::string& text);
//! A column of numbers, one or more per line, comma separated.
std::vector<double> values_from_csv(const std::string& text);

//! Layout header stored next to a matrix file: {dim, tau_power}.
struct MatrixHeader
{
  int dim = 0;
  int tau_power = 0;
};

Json to_json(const MatrixHeader& h);
MatrixHeader matrix_header_from_json(const Json& j);

} // namespace fhellm

#endif // FHELLM_IO_H
