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
#include "fhellm/io.h"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fhellm {

namespace {

std::vector<std::string> split_fields(const std::string& line)
{
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ','))
    out.push_back(f);
  return out;
}

double parse_number(const std::string& s)
{
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  for (std::size_t i = used; i < s.size(); ++i)
    if (!std::isspace(static_cast<unsigned char>(s[i])))
      throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

bool blank(const std::string& s)
{
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

} // namespace

std::string read_text(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text)
{
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out << text;
}

Json to_json(const SimParams& p)
{
  Json j;
  j["slot_count"] = p.slot_count;
  j["top_level"] = p.top_level;
  j["boot_level"] = p.boot_level;
  j["log_scale"] = p.log_scale;
  j["noise_bits"] = p.noise_bits ? Json(*p.noise_bits) : Json(nullptr);
  j["seed"] = p.seed;
  return j;
}

SimParams sim_params_from_json(const Json& j)
{
  if (!j.is_object())
    throw std::invalid_argument("parameters must be a JSON object");
  SimParams p;
  p.slot_count = j.value("slot_count", p.slot_count);
  p.top_level = j.value("top_level", p.top_level);
  p.boot_level = j.value("boot_level", p.boot_level);
  p.log_scale = j.value("log_scale", p.log_scale);
  if (j.contains("noise_bits")) {
    if (j["noise_bits"].is_null())
      p.noise_bits.reset();
    else
      p.noise_bits = j["noise_bits"].get<int>();
  }
  p.seed = j.value("seed", p.seed);
  p.validate();
  return p;
}

SimParams load_sim_params(const std::string& path)
{
  return sim_params_from_json(Json::parse(read_text(path)));
}

Json to_json(const CostLedger& c)
{
  Json j;
  j["ct_rotations"] = c.ct_rotations;
  j["cc_mults"] = c.cc_mults;
  j["pc_mults"] = c.pc_mults;
  j["pt_rotations"] = c.pt_rotations;
  j["pt_mults"] = c.pt_mults;
  j["rescales"] = c.rescales;
  j["bootstraps"] = c.bootstraps;
  j["min_level_reached"] = c.min_level_reached;
  return j;
}

CostLedger cost_ledger_from_json(const Json& j)
{
  CostLedger c;
  c.ct_rotations = j.value("ct_rotations", c.ct_rotations);
  c.cc_mults = j.value("cc_mults", c.cc_mults);
  c.pc_mults = j.value("pc_mults", c.pc_mults);
  c.pt_rotations = j.value("pt_rotations", c.pt_rotations);
  c.pt_mults = j.value("pt_mults", c.pt_mults);
  c.rescales = j.value("rescales", c.rescales);
  c.bootstraps = j.value("bootstraps", c.bootstraps);
  c.min_level_reached = j.value("min_level_reached", c.min_level_reached);
  return c;
}

Json to_json(const ApproxPoly& p)
{
  Json j;
  j["basis"] = p.basis == Basis::chebyshev ? "chebyshev" : "monomial";
  j["interval"] = {p.lo, p.hi};
  j["coeffs"] = p.coeffs;
  if (!p.target.empty())
    j["target"] = p.target;
  return j;
}

ApproxPoly approx_poly_from_json(const Json& j)
{
  ApproxPoly p;
  std::string b = j.at("basis").get<std::string>();
  if (b == "chebyshev")
    p.basis = Basis::chebyshev;
  else if (b == "monomial")
    p.basis = Basis::monomial;
  else
    throw std::invalid_argument("unknown basis '" + b + "'");
  const Json& iv = j.at("interval");
  if (!iv.is_array() || iv.size() != 2)
    throw std::invalid_argument("interval must be [lo, hi]");
  p.lo = iv[0].get<double>();
  p.hi = iv[1].get<double>();
  if (!(p.lo < p.hi))
    throw std::invalid_argument("interval must satisfy lo < hi");
  p.coeffs = j.at("coeffs").get<std::vector<double>>();
  if (p.coeffs.empty())
    throw std::invalid_argument("polynomial has no coefficients");
  p.target = j.value("target", std::string{});
  return p;
}

Json to_json(const SosTree& t)
{
  Json j;
  j["k"] = t.k;
  j["j"] = t.j;
  j["interval"] = {t.lo, t.hi};
  j["sign"] = t.sign;
  j["alpha"] = t.alpha;
  j["beta"] = t.beta;
  Json levels = Json::array();
  for (const auto& lvl : t.levels) {
    Json coeffs = Json::array(), consts = Json::array();
    for (const auto& node : lvl) {
      coeffs.push_back(node.u.coeffs);
      consts.push_back(node.m);
    }
    levels.push_back({{"coeffs", coeffs}, {"m", consts}});
  }
  j["levels"] = levels;
  j["scores"] = t.scores;
  return j;
}

SosTree sos_tree_from_json(const Json& j)
{
  SosTree t;
  t.k = j.at("k").get<int>();
  t.j = j.at("j").get<int>();
  t.lo = j.at("interval").at(0).get<double>();
  t.hi = j.at("interval").at(1).get<double>();
  t.sign = j.value("sign", 1);
  t.alpha = j.value("alpha", t.alpha);
  t.beta = j.value("beta", t.beta);
  if (t.j < 0 || t.j >= std::max(t.k, 1) || (t.sign != 1 && t.sign != -1))
    throw std::invalid_argument("malformed tree header");
  const Json& levels = j.at("levels");
  if (static_cast<int>(levels.size()) != t.j + 1)
    throw std::invalid_argument("tree needs j + 1 levels");
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const Json& c = levels[l].at("coeffs");
    const Json& m = levels[l].at("m");
    if (c.size() != (std::size_t{1} << l) || m.size() != c.size())
      throw std::invalid_argument("tree level " + std::to_string(l) +
                                  " has the wrong node count");
    std::vector<SosNode> nodes;
    for (std::size_t i = 0; i < c.size(); ++i) {
      SosNode n;
      n.u.basis = Basis::chebyshev;
      n.u.lo = t.lo;
      n.u.hi = t.hi;
      n.u.coeffs = c[i].get<std::vector<double>>();
      n.m = m[i].get<double>();
      if (n.u.degree() != (1 << (t.k - static_cast<int>(l))))
        throw std::invalid_argument("tree node has the wrong degree");
      nodes.push_back(std::move(n));
    }
    t.levels.push_back(std::move(nodes));
  }
  t.scores = j.value("scores", std::vector<double>{});
  return t;
}

Json to_json(const CostReport& r)
{
  auto phase = [](const std::string& name, const CostLedger& c, int levels) {
    Json j;
    j["name"] = name;
    j["ct_rotations"] = c.ct_rotations;
    j["cc_mults"] = c.cc_mults;
    j["pc_mults"] = c.pc_mults;
    j["rescales"] = c.rescales;
    j["bootstraps"] = c.bootstraps;
    j["levels"] = levels;
    return j;
  };
  Json phases = Json::array();
  for (const auto& p : r.phases)
    phases.push_back(phase(p.name, p.cost, p.levels));
  Json j;
  j["phases"] = phases;
  j["total"] = phase("total", r.total(), r.total_levels());
  return j;
}

Json matrix_to_json(const ClearMatrix& m)
{
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k)
      row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

ClearMatrix matrix_from_json(const Json& j)
{
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw std::invalid_argument("matrix must be a non-empty array of rows");
  const std::size_t cols = j[0].size();
  ClearMatrix m(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != cols)
      throw std::invalid_argument("ragged matrix rows");
    for (std::size_t k = 0; k < cols; ++k)
      m(i, k) = j[i][k].get<double>();
  }
  return m;
}

std::string matrix_to_csv(const ClearMatrix& m)
{
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k)
      os << (k ? "," : "") << m(i, k);
    os << '\n';
  }
  return os.str();
}

ClearMatrix matrix_from_csv(const std::string& text)
{
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (blank(line))
      continue;
    std::vector<double> r;
    for (const auto& f : split_fields(line))
      r.push_back(parse_number(f));
    if (!rows.empty() && r.size() != rows[0].size())
      throw std::invalid_argument("ragged CSV rows");
    rows.push_back(std::move(r));
  }
  if (rows.empty())
    throw std::invalid_argument("empty CSV matrix");
  ClearMatrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      m(i, k) = rows[i][k];
  return m;
}

std::vector<double> values_from_csv(const std::string& text)
{
  std::vector<double> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (blank(line))
      continue;
    for (const auto& f : split_fields(line))
      out.push_back(parse_number(f));
  }
  return out;
}

Json to_json(const MatrixHeader& h)
{
  return Json{{"dim", h.dim}, {"tau_power", h.tau_power}};
}

MatrixHeader matrix_header_from_json(const Json& j)
{
  MatrixHeader h;
  h.dim = j.at("dim").get<int>();
  h.tau_power = j.value("tau_power", 0);
  if (h.dim < 1 || h.tau_power < 0)
    throw std::invalid_argument("bad matrix header");
  return h;
}

} // namespace fhellm
