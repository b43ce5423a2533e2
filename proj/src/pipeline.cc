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
#include "fhellm/pipeline.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

#include "fhellm/polyapprox.h"

namespace fhellm {

namespace {

class WeightStream
{
public:
  explicit WeightStream(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return (rng_() >> 11) * 0x1p-53; }

  ClearMatrix matrix(int r, int c, double scale)
  {
    ClearMatrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j)
        m(i, j) = (2.0 * uniform() - 1.0) * scale;
    return m;
  }

  Eigen::VectorXd gain(int n)
  {
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i)
      g[i] = 1.0 + 0.1 * (2.0 * uniform() - 1.0);
    return g;
  }

private:
  std::mt19937_64 rng_;
};

long pmod(long a, long n) { return ((a % n) + n) % n; }

ClearMatrix rows(const ClearMatrix& x, int begin, int count)
{
  return x.block(begin, 0, count, x.cols());
}

ClearMatrix append_rows(const ClearMatrix& a, const ClearMatrix& b)
{
  if (a.rows() == 0)
    return b;
  ClearMatrix r(a.rows() + b.rows(), b.cols());
  r << a, b;
  return r;
}

double max_abs_diff(const ClearMatrix& a, const ClearMatrix& b)
{
  return (a - b).cwiseAbs().maxCoeff();
}

} // namespace

void ToyModelConfig::validate() const
{
  if (d_model < 2 || d_head < 2 || n_heads < 1 || d_ff < 1 || n_layers < 1 ||
      vocab < 1)
    throw std::invalid_argument("toy model sizes must be positive");
  if (d_head * n_heads != d_model)
    throw std::invalid_argument("d_head * n_heads must equal d_model");
  if (d_head % 2 != 0)
    throw std::invalid_argument("d_head must be even");
}

ToyModel::ToyModel(const ToyModelConfig& cfg) : cfg_(cfg)
{
  cfg_.validate();
  WeightStream w(cfg_.seed);
  const double s = 1.0 / std::sqrt(static_cast<double>(cfg_.d_model));
  const double sf = 1.0 / std::sqrt(static_cast<double>(cfg_.d_ff));
  embed_ = w.matrix(cfg_.vocab, cfg_.d_model, 1.0);
  for (int l = 0; l < cfg_.n_layers; ++l) {
    LayerWeights lw;
    lw.attn_norm = w.gain(cfg_.d_model);
    lw.wq = w.matrix(cfg_.d_model, cfg_.d_model, s);
    lw.wk = w.matrix(cfg_.d_model, cfg_.d_model, s);
    lw.wv = w.matrix(cfg_.d_model, cfg_.d_model, s);
    lw.wo = w.matrix(cfg_.d_model, cfg_.d_model, s);
    lw.ffn_norm = w.gain(cfg_.d_model);
    lw.w_gate = w.matrix(cfg_.d_model, cfg_.d_ff, s);
    lw.w_up = w.matrix(cfg_.d_model, cfg_.d_ff, s);
    lw.w_down = w.matrix(cfg_.d_ff, cfg_.d_model, sf);
    layers_.push_back(std::move(lw));
  }
  final_norm_ = w.gain(cfg_.d_model);
  w_out_ = w.matrix(cfg_.d_model, cfg_.vocab, s);
}

ClearMatrix ToyModel::embed(const std::vector<int>& tokens) const
{
  ClearMatrix x(static_cast<Eigen::Index>(tokens.size()), cfg_.d_model);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] < 0 || tokens[i] >= cfg_.vocab)
      throw std::out_of_range("token id outside the vocabulary");
    x.row(static_cast<Eigen::Index>(i)) = embed_.row(tokens[i]);
  }
  return x;
}

void PrefillSplit::validate() const
{
  if (ptok < 0 || etok < 1 || ptok + etok != ntok)
    throw std::invalid_argument(
        "prefill split needs ptok >= 0, etok >= 1, ptok + etok == ntok");
}

std::vector<int> make_tokens(int n, int vocab, std::uint64_t seed)
{
  std::mt19937_64 rng(seed ^ 0x746f6b656e73ULL);
  std::vector<int> t(n);
  for (int& x : t)
    x = static_cast<int>(rng() % static_cast<std::uint64_t>(vocab));
  return t;
}

double rope_angle(int pos, int pair, int d_head)
{
  return pos * std::pow(10.0, -4.0 * pair / d_head);
}

ClearMatrix rope(const ClearMatrix& x, int start_pos, int d_head)
{
  if (x.cols() % d_head != 0 || d_head % 2 != 0)
    throw std::invalid_argument("rope: width must be a multiple of d_head");
  const int h = d_head / 2;
  ClearMatrix r = x;
  for (Eigen::Index row = 0; row < x.rows(); ++row)
    for (Eigen::Index base = 0; base < x.cols(); base += d_head)
      for (int a = 0; a < h; ++a) {
        double th = rope_angle(start_pos + static_cast<int>(row), a, d_head);
        double c = std::cos(th), s = std::sin(th);
        double u = x(row, base + a), v = x(row, base + a + h);
        r(row, base + a) = u * c - v * s;
        r(row, base + a + h) = v * c + u * s;
      }
  return r;
}

ClearMatrix rms_norm(const ClearMatrix& x, const Eigen::VectorXd& gain)
{
  ClearMatrix r(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double ms = x.row(i).squaredNorm() / static_cast<double>(x.cols());
    r.row(i) = x.row(i).cwiseProduct(gain.transpose()) / std::sqrt(ms + 1e-6);
  }
  return r;
}

double silu(double x) { return x / (1.0 + std::exp(-x)); }

Eigen::VectorXd forward_chunk(const ToyModel& model, const ClearMatrix& x,
                              KvCache& cache)
{
  const auto& cfg = model.config();
  if (x.rows() < 1 || x.cols() != cfg.d_model)
    throw std::invalid_argument("chunk must be T x d_model with T >= 1");
  if (cache.k.empty()) {
    cache.k.assign(cfg.n_layers, ClearMatrix(0, cfg.d_model));
    cache.v.assign(cfg.n_layers, ClearMatrix(0, cfg.d_model));
  }
  if (static_cast<int>(cache.k.size()) != cfg.n_layers)
    throw std::invalid_argument("cache layer count mismatch");
  const int start = cache.tokens();
  const int t = static_cast<int>(x.rows());
  const double inv = 1.0 / std::sqrt(static_cast<double>(cfg.d_head));

  ClearMatrix h = x;
  for (int l = 0; l < cfg.n_layers; ++l) {
    const LayerWeights& w = model.layers()[l];
    ClearMatrix a = rms_norm(h, w.attn_norm);
    ClearMatrix q = rope(a * w.wq, start, cfg.d_head);
    cache.k[l] = append_rows(cache.k[l], rope(a * w.wk, start, cfg.d_head));
    cache.v[l] = append_rows(cache.v[l], a * w.wv);
    const ClearMatrix& kk = cache.k[l];
    const ClearMatrix& vv = cache.v[l];

    ClearMatrix att = ClearMatrix::Zero(t, cfg.d_model);
    for (int hd = 0; hd < cfg.n_heads; ++hd) {
      const int c0 = hd * cfg.d_head;
      for (int r = 0; r < t; ++r) {
        const int visible = start + r + 1;
        std::vector<double> sc(visible);
        for (int s = 0; s < visible; ++s)
          sc[s] = q.row(r).segment(c0, cfg.d_head).dot(
                      kk.row(s).segment(c0, cfg.d_head)) *
                  inv;
        std::vector<double> p = softmax_clear(sc);
        for (int s = 0; s < visible; ++s)
          att.row(r).segment(c0, cfg.d_head) +=
              p[s] * vv.row(s).segment(c0, cfg.d_head);
      }
    }
    h += att * w.wo;

    ClearMatrix b = rms_norm(h, w.ffn_norm);
    ClearMatrix g = b * w.w_gate;
    ClearMatrix u = b * w.w_up;
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      for (Eigen::Index j = 0; j < g.cols(); ++j)
        g(i, j) = silu(g(i, j)) * u(i, j);
    h += g * w.w_down;
  }
  ClearMatrix last = rms_norm(h.bottomRows(1), model.final_norm());
  return (last * model.w_out()).row(0).transpose();
}

ForwardResult full_prefill(const ToyModel& model, const ClearMatrix& x)
{
  ForwardResult r;
  r.logits = forward_chunk(model, x, r.cache);
  return r;
}

ForwardResult chunked_prefill(const ToyModel& model, const ClearMatrix& x,
                              const PrefillSplit& split)
{
  split.validate();
  if (x.rows() != split.ntok)
    throw std::invalid_argument("token count differs from the split");
  ForwardResult r;
  if (split.ptok > 0)
    forward_chunk(model, rows(x, 0, split.ptok), r.cache);
  r.logits = forward_chunk(model, rows(x, split.ptok, split.etok), r.cache);
  return r;
}

ForwardResult decode_step(const ToyModel& model, const KvCache& cache,
                          const Eigen::RowVectorXd& x)
{
  ForwardResult r;
  r.cache = cache;
  ClearMatrix one = x;
  r.logits = forward_chunk(model, one, r.cache);
  return r;
}

CostLedger CostReport::total() const
{
  CostLedger t;
  for (const auto& p : phases)
    t += p.cost;
  return t;
}

int CostReport::total_levels() const
{
  int s = 0;
  for (const auto& p : phases)
    s += p.levels;
  return s;
}

const PhaseCost* CostReport::find(const std::string& name) const
{
  for (const auto& p : phases)
    if (p.name == name)
      return &p;
  return nullptr;
}

PhaseScope::PhaseScope(CostReport* report, const Evaluator& ev,
                       std::string name, int level_in)
    : report_(report), ev_(ev), name_(std::move(name)), before_(ev.ledger()),
      level_in_(level_in)
{
}

void PhaseScope::close(int level_out)
{
  if (!report_)
    return;
  PhaseCost p;
  p.name = name_;
  p.cost = ev_.ledger() - before_;
  p.cost.min_level_reached = level_out;
  p.levels = level_in_ - level_out;
  report_->phases.push_back(std::move(p));
}

AttentionInputs attention_inputs(const ToyModel& model, const ClearMatrix& x,
                                 const PrefillSplit& split)
{
  split.validate();
  const auto& cfg = model.config();
  if (cfg.n_heads != 1)
    throw std::invalid_argument("attention demo uses a single head");
  const LayerWeights& w = model.layers()[0];
  ClearMatrix a = rms_norm(x, w.attn_norm);
  ClearMatrix q = a * w.wq, k = a * w.wk, v = a * w.wv;
  AttentionInputs in;
  in.start_pos = split.ptok;
  in.q_pub = rope(rows(q, 0, split.ptok), 0, cfg.d_head);
  in.k_pub = rope(rows(k, 0, split.ptok), 0, cfg.d_head);
  in.v_pub = rows(v, 0, split.ptok);
  in.q_priv = rows(q, split.ptok, split.etok);
  in.k_new = rows(k, split.ptok, split.etok);
  in.v_new = rows(v, split.ptok, split.etok);
  return in;
}

ClearMatrix pc_attention_clear(const AttentionInputs& in)
{
  const int d = static_cast<int>(in.q_priv.cols());
  ClearMatrix q = rope(in.q_priv, in.start_pos, d);
  ClearMatrix s = q * in.k_pub.transpose() / std::sqrt(static_cast<double>(d));
  return colwise_softmax(s.transpose()).transpose() * in.v_pub;
}

PackedMatrix rope_tau2(Evaluator& ev, const PackedMatrix& xt, int start_pos)
{
  if (xt.tau_power != 2)
    throw std::invalid_argument("rope_tau2 expects tau power 2");
  const int d = xt.dim;
  if (d % 2 != 0)
    throw std::invalid_argument("rope_tau2 needs an even dimension");
  const int h = d / 2;
  ClearMatrix c(d, d), s(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      // stored (i, j) is feature (i + 2j) mod d of token j
      int a = static_cast<int>(pmod(i + 2L * j, d));
      double th = rope_angle(start_pos + j, a % h, d);
      c(i, j) = std::cos(th);
      s(i, j) = (a < h ? -1.0 : 1.0) * std::sin(th);
    }
  PackedMatrix partner = ct_rot_row(ev, xt, h);
  SimCiphertext u = ev.pc_mult(ev.encode(pack(c, ev.slots(), xt.fill)), xt.ct);
  SimCiphertext v =
      ev.pc_mult(ev.encode(pack(s, ev.slots(), xt.fill)), partner.ct);
  PackedMatrix out = xt;
  out.ct = ev.add(u, v);
  return out;
}

PackedMatrix pc_attention_encrypted(Evaluator& ev, const PackedMatrix& q_t,
                                    const ClearMatrix& k_pub,
                                    const ClearMatrix& v_pub, int start_pos,
                                    const SoftmaxKernel& kernel,
                                    const PcAttentionOptions& opts,
                                    CostReport* report, TrackReport* track)
{
  if (q_t.tau_power != 2)
    throw std::invalid_argument(
        "pc attention expects queries at tau power 2 (broken tau chain)");
  const int d = q_t.dim;
  if (k_pub.rows() != d || k_pub.cols() != d || v_pub.rows() != d ||
      v_pub.cols() != d)
    throw std::invalid_argument("public cache must be d x d");
  const BsgsSplit split = BsgsSplit::defaults(d);

  PhaseScope p_rope(report, ev, "rope", q_t.ct.level);
  PackedMatrix x = rope_tau2(ev, q_t, start_pos);
  p_rope.close(x.ct.level);

  PhaseScope p_qk(report, ev, "pcmm_qk", x.ct.level);
  ClearMatrix a = k_pub / std::sqrt(static_cast<double>(d));
  PcmmPlan plan1 = make_pcmm_plan(ev, a, 1, split, opts.on_the_fly, x.fill);
  plan1.parallel = opts.parallel;
  PackedMatrix s = pcmm_bsgs(ev, plan1, x);
  s.ct = ev.add_const(s.ct, -opts.shift);
  p_qk.close(s.ct.level);

  PhaseScope p_sm(report, ev, "softmax", s.ct.level);
  PackedMatrix pr = softmax_on_tau_packed(ev, s, kernel, track);
  p_sm.close(pr.ct.level);

  PhaseScope p_sv(report, ev, "pcmm_sv", pr.ct.level);
  PcmmPlan plan0 =
      make_pcmm_plan(ev, v_pub.transpose(), 0, split, opts.on_the_fly, x.fill);
  plan0.parallel = opts.parallel;
  PackedMatrix out = pcmm_bsgs(ev, plan0, pr);
  p_sv.close(out.ct.level);
  return out;
}

PackedMatrix cc_attention_scores(Evaluator& ev, const PackedMatrix& q_t,
                                 const PackedMatrix& k_t, CostReport* report)
{
  if (q_t.tau_power != 2 || k_t.tau_power != 2)
    throw std::invalid_argument("cc attention expects tau power 2 operands");
  if (q_t.dim != k_t.dim)
    throw std::invalid_argument("cc attention: dimension mismatch");
  const int d = q_t.dim;

  PhaseScope p_b(report, ev, "cc_bootstrap", q_t.ct.level);
  PackedMatrix q = q_t, k = k_t;
  q.ct = ev.bootstrap(q_t.ct);
  k.ct = ev.bootstrap(k_t.ct);
  p_b.close(q.ct.level);

  // stored tau^2(M^T)(r, c) = M(c, r + 2c)
  PhaseScope p_p(report, ev, "cc_layout", q.ct.level);
  DiagonalMap qm = permutation_map(
      d, ev.slots(), q.fill, [d](int i, int j) {
        return std::make_pair(static_cast<int>(pmod(j - 2L * i, d)), i);
      });
  const double inv = 1.0 / std::sqrt(static_cast<double>(d));
  for (auto& w : qm.weights)
    for (double& x : w)
      x *= inv;
  PackedMatrix qr = q;
  qr.ct = apply_diagonal_map(ev, q.ct, qm);
  qr.tau_power = 0;
  PackedMatrix kt = apply_matrix_permutation(
      ev, k,
      [d](int i, int j) {
        return std::make_pair(static_cast<int>(pmod(i - 2L * j, d)), j);
      },
      0);
  p_p.close(qr.ct.level);

  PhaseScope p_m(report, ev, "ccmm", qr.ct.level);
  PackedMatrix out = ccmm_jkls(ev, qr, kt);
  p_m.close(out.ct.level);
  return out;
}

SimParams attention_params(int d, std::optional<int> noise_bits,
                           std::uint64_t seed)
{
  SimParams sp;
  std::size_t dd = static_cast<std::size_t>(d) * d;
  sp.slot_count = std::max<std::size_t>(512, std::bit_ceil(dd));
  sp.top_level = 12;
  sp.boot_level = 11;
  sp.log_scale = 40;
  sp.noise_bits = noise_bits;
  sp.seed = seed;
  return sp;
}

AttentionDemoReport attention_demo(const AttentionDemoConfig& cfg)
{
  const int d = cfg.d;
  if (d < 2 || (d & (d - 1)) != 0)
    throw std::invalid_argument("attention demo needs a power-of-two d");
  ToyModelConfig mc;
  mc.d_model = mc.d_head = d;
  mc.d_ff = 4 * d;
  mc.seed = cfg.seed;
  ToyModel model(mc);
  PrefillSplit split{2 * d, d, d};
  ClearMatrix x = model.embed(make_tokens(split.ntok, mc.vocab, cfg.seed));
  AttentionInputs in = attention_inputs(model, x, split);

  // translation and calibration from public data only
  const double inv = 1.0 / std::sqrt(static_cast<double>(d));
  ClearMatrix pub_scores = in.k_pub * in.q_pub.transpose() * inv;
  const double shift = 1.5 * std::max(pub_scores.cwiseAbs().maxCoeff(), 1e-3);
  SoftmaxConfig sc;
  sc.d = d;
  sc.M = 2.0 * shift;
  std::vector<std::vector<double>> samples;
  for (int j = 0; j < d; ++j) {
    std::vector<double> col(d);
    for (int i = 0; i < d; ++i)
      col[i] = pub_scores(i, j) - shift;
    samples.push_back(std::move(col));
  }
  SoftmaxKernel kernel(sc, samples);

  Evaluator ev(attention_params(d, cfg.noise_bits, cfg.seed));
  Fill fill = Fill::periodic;
  PackedMatrix q_t = encrypt_logical(ev, in.q_priv.transpose(), 2, fill);

  AttentionDemoReport rep;
  rep.d = d;
  rep.shift = shift;
  rep.range_M = sc.M;
  rep.tolerance = cfg.noise_bits ? std::ldexp(1.0, -8) : std::ldexp(1.0, -10);
  rep.levels_in = q_t.ct.level;
  PcAttentionOptions opts;
  opts.shift = shift;
  opts.on_the_fly = cfg.on_the_fly;
  opts.parallel = cfg.parallel;
  TrackReport track;
  const auto boots_before = ev.ledger().bootstraps;
  PackedMatrix out = pc_attention_encrypted(ev, q_t, in.k_pub, in.v_pub,
                                            in.start_pos, kernel, opts,
                                            &rep.phases, &track);
  rep.levels_out = out.ct.level;
  rep.aux_bootstraps = track.aux_bootstraps;
  rep.main_bootstraps =
      static_cast<int>(ev.ledger().bootstraps - boots_before) -
      track.aux_bootstraps;
  ClearMatrix got = decrypt_logical(ev, out).transpose();
  rep.max_err = max_abs_diff(got, pc_attention_clear(in));

  if (cfg.with_cc) {
    PackedMatrix q2 = encrypt_logical(ev, in.q_priv.transpose(), 2, fill);
    PackedMatrix k2 = encrypt_logical(ev, in.k_new.transpose(), 2, fill);
    PhaseScope p_r(&rep.phases, ev, "cc_rope", q2.ct.level);
    q2 = rope_tau2(ev, q2, in.start_pos);
    k2 = rope_tau2(ev, k2, in.start_pos);
    p_r.close(q2.ct.level);
    PackedMatrix cc = cc_attention_scores(ev, q2, k2, &rep.phases);
    ClearMatrix want = rope(in.q_priv, in.start_pos, d) *
                       rope(in.k_new, in.start_pos, d).transpose() * inv;
    rep.cc_max_err = max_abs_diff(decrypt_logical(ev, cc), want);
  }
  rep.ledger = ev.ledger();
  return rep;
}

FfnCheckReport ffn_check(const FfnCheckConfig& cfg)
{
  const int T = cfg.tokens, F = cfg.d_ff, D = cfg.d_model;
  auto p2 = [](int n) { return n > 0 && (n & (n - 1)) == 0; };
  if (!p2(T) || !p2(F) || !p2(D) || cfg.outlier_every < 1)
    throw std::invalid_argument("ffn_check sizes must be powers of two");
  SimParams sp;
  sp.slot_count = std::max<std::size_t>(
      1024, std::bit_ceil(static_cast<std::size_t>(T) * std::max(F, D)));
  sp.noise_bits = cfg.noise_bits;
  sp.seed = cfg.seed;
  Evaluator ev(sp);
  const std::size_t n = ev.slots();
  RangeTable ranges;
  WeightStream rng(cfg.seed ^ 0x66666eULL);
  FfnCheckReport rep;

  // SiLU with per-dimension ranges; slot s holds dimension s mod F
  std::vector<double> gate(static_cast<std::size_t>(T) * F), up(gate.size());
  std::vector<double> lo(n), hi(n);
  auto wide = [&](int dim) { return dim % cfg.outlier_every == 0; };
  for (int t = 0; t < T; ++t)
    for (int f = 0; f < F; ++f) {
      double r = wide(f) ? ranges.silu_wide_hi : ranges.silu_hi;
      gate[t * F + f] = (2.0 * rng.uniform() - 1.0) * r;
      up[t * F + f] = 2.0 * rng.uniform() - 1.0;
    }
  for (std::size_t s = 0; s < n; ++s) {
    bool w = wide(static_cast<int>(s % F));
    lo[s] = w ? ranges.silu_wide_lo : ranges.silu_lo;
    hi[s] = w ? ranges.silu_wide_hi : ranges.silu_hi;
  }
  ApproxPoly narrow = chebyshev_fit(named_function("silu"), ranges.silu_lo,
                                    ranges.silu_hi, cfg.silu_degree, "silu");
  ApproxPoly broad =
      chebyshev_fit(named_function("silu"), ranges.silu_wide_lo,
                    ranges.silu_wide_hi, cfg.silu_degree, "silu");
  std::vector<SimPlaintext> coeffs;
  for (int c = 0; c <= cfg.silu_degree; ++c) {
    std::vector<double> v(n);
    for (std::size_t s = 0; s < n; ++s)
      v[s] = wide(static_cast<int>(s % F)) ? broad.coeffs[c] : narrow.coeffs[c];
    coeffs.push_back(ev.encode(v));
  }
  SimCiphertext g = ev.encrypt(gate);
  SimCiphertext u = ev.encrypt(up);

  PhaseScope p_silu(&rep.phases, ev, "silu", g.level);
  SimCiphertext sg = ps_eval_pt_coeffs(ev, coeffs, normalize_input(ev, g, lo, hi),
                                       Basis::chebyshev);
  p_silu.close(sg.level);
  rep.silu_levels = g.level - sg.level;

  PhaseScope p_glu(&rep.phases, ev, "swiglu", sg.level);
  SimCiphertext prod = ev.cc_mult(sg, ev.drop_level(u, sg.level));
  p_glu.close(prod.level);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t i = s % gate.size();
    double want = silu(gate[i]);
    rep.silu_max_err = std::max(rep.silu_max_err, std::abs(sg.slots[s] - want));
    rep.swiglu_max_err =
        std::max(rep.swiglu_max_err, std::abs(prod.slots[s] - want * up[i]));
  }

  // RMSNorm: slot f*T + t holds feature f of token t
  std::vector<double> h(static_cast<std::size_t>(T) * D);
  std::vector<double> ms(T, 0.0);
  for (int t = 0; t < T; ++t) {
    double amp = 0.6 + rng.uniform();
    for (int f = 0; f < D; ++f) {
      double v = amp * (2.0 * rng.uniform() - 1.0) * std::sqrt(3.0);
      h[f * T + t] = v;
      ms[t] += v * v / D;
    }
  }
  double mean_ms = 0;
  for (double m : ms)
    mean_ms += m / T;
  const double c = 1.0 / mean_ms; // layer-wise constant, public
  ApproxPoly inv = chebyshev_fit(named_function("invsqrt"), ranges.invsqrt_lo,
                                 ranges.invsqrt_hi, cfg.invsqrt_degree,
                                 "invsqrt");
  for (double& a : inv.coeffs)
    a *= std::sqrt(c);

  SimCiphertext hc = ev.encrypt(h);
  PhaseScope p_rms(&rep.phases, ev, "rmsnorm", hc.level);
  SimCiphertext sq = strided_norm_sq(ev, hc, D, T);
  SimCiphertext z = normalize_input(ev, sq, ranges.invsqrt_lo * D / c,
                                    ranges.invsqrt_hi * D / c);
  SimCiphertext r = ps_eval_ct(ev, inv, z, Domain::normalized);
  SimCiphertext y = ev.cc_mult(ev.drop_level(hc, r.level), r);
  p_rms.close(y.level);
  rep.rms_levels = hc.level - y.level;
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t i = s % h.size();
    double want = h[i] / std::sqrt(ms[i % T]);
    rep.rms_max_err = std::max(rep.rms_max_err, std::abs(y.slots[s] - want));
  }
  return rep;
}

} // namespace fhellm
