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
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fhellm/bitrev.h"
#include "fhellm/checks.h"
#include "fhellm/io.h"

namespace py = pybind11;
using namespace fhellm;

namespace {

py::object to_py(const Json& j)
{
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict ledger_dict(const CostLedger& c) { return to_py(to_json(c)); }

py::dict matmul_dict(const MatmulCheckReport& r)
{
  py::dict d;
  d["max_abs_error"] = r.max_err;
  d["level_drop"] = r.level_drop;
  d["ct_rotations"] = r.ct_rotations;
  d["ledger"] = ledger_dict(r.ledger);
  return d;
}

SimParams make_params(std::size_t slots, int top, int boot,
                      std::optional<int> noise, std::uint64_t seed)
{
  SimParams p;
  p.slot_count = slots;
  p.top_level = top;
  p.boot_level = boot;
  p.noise_bits = noise;
  p.seed = seed;
  p.validate();
  return p;
}

} // namespace

PYBIND11_MODULE(fhellm, m)
{
  m.doc() = "Slot-level CKKS simulation of encrypted transformer kernels";

  py::register_exception<NeedsBootstrap>(m, "NeedsBootstrap",
                                         PyExc_RuntimeError);

  py::class_<SimParams>(m, "SimParams")
      .def(py::init(&make_params), py::arg("slot_count") = 1024,
           py::arg("top_level") = 12, py::arg("boot_level") = 8,
           py::arg("noise_bits") = std::optional<int>{30},
           py::arg("seed") = 0)
      .def_readwrite("slot_count", &SimParams::slot_count)
      .def_readwrite("top_level", &SimParams::top_level)
      .def_readwrite("boot_level", &SimParams::boot_level)
      .def_readwrite("log_scale", &SimParams::log_scale)
      .def_readwrite("noise_bits", &SimParams::noise_bits)
      .def_readwrite("seed", &SimParams::seed);

  py::class_<SimCiphertext>(m, "Ciphertext")
      .def_readonly("level", &SimCiphertext::level)
      .def_readonly("slots", &SimCiphertext::slots)
      .def_property_readonly("noise", &SimCiphertext::noise_est);

  py::class_<Evaluator>(m, "Evaluator")
      .def(py::init<const SimParams&>())
      .def("encrypt",
           [](Evaluator& ev, const std::vector<double>& v) {
             return ev.encrypt(v);
           })
      .def("decrypt", &Evaluator::decrypt_values)
      .def("add", &Evaluator::add)
      .def("sub", &Evaluator::sub)
      .def("mul", &Evaluator::cc_mult)
      .def("mul_plain",
           [](Evaluator& ev, const SimCiphertext& ct,
              const std::vector<double>& v) {
             return ev.pc_mult(ev.encode(v), ct);
           })
      .def("rotate", &Evaluator::rotate)
      .def("bootstrap", &Evaluator::bootstrap)
      .def("ledger", [](const Evaluator& ev) { return ledger_dict(ev.ledger()); });

  m.def("bit_reverse", &bit_reverse, py::arg("x"), py::arg("k"));
  m.def("perm_f", &perm_f, py::arg("x"), py::arg("k"));
  m.def("perm_g", &perm_g);
  m.def("perm_h", &perm_h);
  m.def("bitrev_properties", [](std::uint64_t seed, int trials) {
    py::dict d;
    for (const auto& r : bitrev_properties(seed, trials))
      d[py::str(r.name)] = r.passed;
    return d;
  }, py::arg("seed") = 0, py::arg("trials") = 1);

  m.def("sigma", &sigma);
  m.def("tau", &tau);
  m.def("tau_pow", &tau_pow);
  m.def("random_matrix", &random_matrix, py::arg("rows"), py::arg("cols"),
        py::arg("seed") = 0);

  m.def("softmax_clear", &softmax_clear);

  m.def("chebyshev_fit",
        [](const std::string& fn, double lo, double hi, int degree) {
          auto f = named_function(fn);
          ApproxPoly p = chebyshev_fit(f, lo, hi, degree, fn);
          py::dict d = to_py(to_json(p));
          d["sup_error"] = sup_error(p, f);
          return d;
        },
        py::arg("fn"), py::arg("lo"), py::arg("hi"), py::arg("degree"));

  m.def("pcmm_check",
        [](int d, int ell, bool naive, bool on_the_fly, int trials,
           std::uint64_t seed) {
          PcmmCheckConfig c;
          c.d = d;
          c.ell = ell;
          c.naive = naive;
          c.on_the_fly = on_the_fly;
          c.trials = trials;
          c.seed = seed;
          return matmul_dict(pcmm_check(c));
        },
        py::arg("d") = 8, py::arg("ell") = 0, py::arg("naive") = false,
        py::arg("on_the_fly") = false, py::arg("trials") = 1,
        py::arg("seed") = 0);

  m.def("ccmm_check",
        [](int d, int trials, std::uint64_t seed) {
          return matmul_dict(ccmm_check({d, trials, std::nullopt, seed}));
        },
        py::arg("d") = 8, py::arg("trials") = 1, py::arg("seed") = 0);

  m.def("softmax_eval",
        [](int d, double M, int k, std::optional<int> noise_bits,
           std::uint64_t seed) {
          SoftmaxEvalConfig c;
          c.softmax.d = d;
          c.softmax.M = M;
          c.softmax.k = k;
          c.noise_bits = noise_bits;
          c.seed = seed;
          SoftmaxEvalReport r = softmax_eval(c);
          py::dict out;
          out["max_abs_error"] = r.max_err;
          out["main_levels_used"] = r.main_levels_used;
          out["main_bootstraps"] = r.main_bootstraps;
          out["aux_bootstraps"] = r.aux_bootstraps;
          out["ledger"] = ledger_dict(r.ledger);
          return out;
        },
        py::arg("d") = 128, py::arg("M") = 32.78, py::arg("k") = 2,
        py::arg("noise_bits") = std::optional<int>{},
        py::arg("seed") = 0);

  m.def("prefill_equiv",
        [](int ntok, int ptok, bool all_splits, int decode_steps,
           std::uint64_t seed) {
          PrefillEquivConfig c;
          c.split = {ntok, ptok, ntok - ptok};
          c.all_splits = all_splits;
          c.decode_steps = decode_steps;
          c.model.seed = seed;
          PrefillEquivReport r = prefill_equiv(c);
          py::dict out;
          out["max_abs_diff"] = r.max_diff;
          out["decode_max_abs_diff"] = r.decode_max_diff;
          out["splits_checked"] = r.splits_checked;
          out["passed"] = r.passed();
          return out;
        },
        py::arg("ntok") = 32, py::arg("ptok") = 24,
        py::arg("all_splits") = false, py::arg("decode_steps") = 0,
        py::arg("seed") = 0);

  m.def("attention_demo",
        [](int d, std::optional<int> noise_bits, std::uint64_t seed) {
          AttentionDemoConfig c;
          c.d = d;
          c.noise_bits = noise_bits;
          c.seed = seed;
          AttentionDemoReport r = attention_demo(c);
          py::dict out;
          out["max_abs_error"] = r.max_err;
          out["tolerance"] = r.tolerance;
          out["main_bootstraps"] = r.main_bootstraps;
          out["aux_bootstraps"] = r.aux_bootstraps;
          out["passed"] = r.passed();
          out["phases"] = to_py(to_json(r.phases));
          return out;
        },
        py::arg("d") = 8, py::arg("noise_bits") = std::optional<int>{},
        py::arg("seed") = 0);
}
