#include "walk_kernels.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

#include "gscan/random.hpp"

namespace gscan::detail {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void two_sided_walk(double* x, std::int64_t m, double mu, double sd, NormalStream& ns) {
  x[m] = 0.0;
  for (std::int64_t j = 1; j <= m; ++j) x[m + j] = x[m + j - 1] + mu + sd * ns();
  for (std::int64_t j = 1; j <= m; ++j) x[m - j] = x[m - j + 1] + mu + sd * ns();
}

std::size_t fft_size(std::size_t n) {
  for (std::size_t s = n;; ++s) {
    std::size_t r = s;
    for (std::size_t p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return s;
  }
}

struct Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// Planning is not thread-safe in FFTW; execution on fresh arrays is.
const Plans& plans_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, Plans> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  double* r = fftw_alloc_real(n);
  fftw_complex* c = fftw_alloc_complex(n / 2 + 1);
  const int ni = static_cast<int>(n);
  Plans p;
  p.forward = fftw_plan_dft_r2c_1d(ni, r, c, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.backward = fftw_plan_dft_c2r_1d(ni, c, r, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(r);
  fftw_free(c);
  return cache.emplace(n, p).first->second;
}

struct FftBuffers {
  std::size_t n = 0;
  std::vector<double> real;
  std::vector<std::complex<double>> fa, fb;

  void resize(std::size_t size) {
    n = size;
    real.assign(n, 0.0);
    fa.resize(n / 2 + 1);
    fb.resize(n / 2 + 1);
  }
};

void forward(const Plans& p, std::vector<double>& in, std::vector<std::complex<double>>& out) {
  fftw_execute_dft_r2c(p.forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
}

// Exact value of sum_i max_j v_i[j] + w_i[j + k] at one k.
double eval_at(std::span<const double* const> v, std::span<const double* const> w,
               std::int64_t j_lo, std::int64_t j_hi, std::int64_t k) {
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double best = kNegInf;
    for (std::int64_t j = j_lo; j <= j_hi; ++j) best = std::max(best, v[i][j] + w[i][j + k]);
    total += best;
  }
  return total;
}

}  // namespace

void make_walks(const WalkSetup& s, std::uint64_t rep, std::vector<double>& v,
                std::vector<double>& w) {
  const std::int64_t nv = 2 * s.m + 1, nw = 4 * s.m + 1;
  v.resize(static_cast<std::size_t>(s.d * nv));
  w.resize(static_cast<std::size_t>(s.d * nw));
  NormalStream ns(s.seed, rep);
  const double mu = -0.5 * s.kappa, sd = std::sqrt(s.kappa);
  for (int i = 0; i < s.d; ++i) {
    two_sided_walk(v.data() + i * nv, s.m, mu, sd, ns);
    two_sided_walk(w.data() + i * nw, 2 * s.m, mu, sd, ns);
  }
}

void correlate(std::span<const double> a, std::span<const double> b,
               std::span<double> out) {
  thread_local FftBuffers buf;
  const std::size_t n = fft_size(b.size());
  if (buf.n != n) buf.resize(n);
  const Plans& p = plans_for(n);
  std::fill(buf.real.begin(), buf.real.end(), 0.0);
  std::copy(a.begin(), a.end(), buf.real.begin());
  forward(p, buf.real, buf.fa);
  std::fill(buf.real.begin(), buf.real.end(), 0.0);
  std::copy(b.begin(), b.end(), buf.real.begin());
  forward(p, buf.real, buf.fb);
  for (std::size_t f = 0; f < buf.fa.size(); ++f) buf.fa[f] = std::conj(buf.fa[f]) * buf.fb[f];
  fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(buf.fa.data()),
                       buf.real.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = buf.real[k] * scale;
}

double max_plus_direct(std::span<const double* const> v,
                       std::span<const double* const> w, std::int64_t j_lo,
                       std::int64_t j_hi, std::int64_t k_lo, std::int64_t k_hi) {
  double best = kNegInf;
  for (std::int64_t k = k_lo; k <= k_hi; ++k) best = std::max(best, eval_at(v, w, j_lo, j_hi, k));
  return best;
}

double max_plus(std::span<const double* const> v, std::span<const double* const> w,
                std::int64_t j_lo, std::int64_t j_hi, std::int64_t k_lo,
                std::int64_t k_hi) {
  const std::size_t d = v.size();
  const std::int64_t q_lo = j_lo + k_lo, q_hi = j_hi + k_hi;
  const std::int64_t nk = k_hi - k_lo + 1, nj = j_hi - j_lo + 1;

  std::vector<double> vmax(d, kNegInf), wmax(d, kNegInf);
  std::vector<std::int64_t> varg(d), warg(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::int64_t j = j_lo; j <= j_hi; ++j)
      if (v[i][j] > vmax[i]) vmax[i] = v[i][j], varg[i] = j;
    for (std::int64_t q = q_lo; q <= q_hi; ++q)
      if (w[i][q] > wmax[i]) wmax[i] = w[i][q], warg[i] = q;
  }

  // Lower bound from a few promising shifts.
  double lower = eval_at(v, w, j_lo, j_hi, k_lo + nk / 2);
  for (std::size_t i = 0; i < d; ++i) {
    const std::int64_t k = std::clamp(warg[i] - varg[i], k_lo, k_hi);
    lower = std::max(lower, eval_at(v, w, j_lo, j_hi, k));
  }
  double upper = 0.0;
  for (std::size_t i = 0; i < d; ++i) upper += vmax[i] + wmax[i];
  const double gap = upper - lower;

  // Any (j, k) beating `lower` has v_i[j] > vmax_i - gap and
  // w_i[j + k] > wmax_i - gap on every axis.
  std::vector<double> cand(static_cast<std::size_t>(nk) * d, kNegInf);
  std::vector<std::int64_t> js, qs;
  for (std::size_t i = 0; i < d; ++i) {
    double* ci = cand.data() + i * nk;
    js.clear();
    qs.clear();
    for (std::int64_t j = j_lo; j <= j_hi; ++j)
      if (v[i][j] >= vmax[i] - gap) js.push_back(j);
    for (std::int64_t q = q_lo; q <= q_hi; ++q)
      if (w[i][q] >= wmax[i] - gap) qs.push_back(q);
    if (static_cast<double>(js.size()) * static_cast<double>(qs.size()) >
        static_cast<double>(nj) * static_cast<double>(nk)) {
      for (std::int64_t k = k_lo; k <= k_hi; ++k) {
        double best = kNegInf;
        for (std::int64_t j = j_lo; j <= j_hi; ++j) best = std::max(best, v[i][j] + w[i][j + k]);
        ci[k - k_lo] = best;
      }
      continue;
    }
    for (std::int64_t j : js) {
      const double vj = v[i][j];
      for (std::int64_t q : qs) {
        const std::int64_t k = q - j;
        if (k < k_lo || k > k_hi) continue;
        double& c = ci[k - k_lo];
        c = std::max(c, vj + w[i][q]);
      }
    }
  }
  double best = lower;
  for (std::int64_t k = 0; k < nk; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += cand[i * nk + k];
    best = std::max(best, s);
  }
  return best;
}

RepValue sum_normalized_rep(const WalkSetup& s, std::uint64_t rep) {
  thread_local std::vector<double> v, w, ev, ew, corr_full, corr_inner, prod_full,
      prod_inner;
  make_walks(s, rep, v, w);
  const std::int64_t m = s.m, mh = s.mh;
  const std::int64_t nv = 2 * m + 1, nw = 4 * m + 1;
  const int d = s.d;

  std::vector<const double*> vp(d), wp(d);
  for (int i = 0; i < d; ++i) {
    vp[i] = v.data() + i * nv;
    wp[i] = w.data() + i * nw;
  }
  const double best_full = max_plus(vp, wp, 0, 2 * m, 0, 2 * m);
  const double best_inner = max_plus(vp, wp, m - mh, m + mh, m - mh, m + mh);

  // Sums over the lattice: for each shift k = g + m, the product over axes
  // of sum_p e^{V(p)} e^{W(p + g)}, each axis scaled by e^{-(max V + max W)}.
  ev.resize(nv);
  ew.resize(nw);
  corr_full.resize(nv);
  corr_inner.resize(nv);
  prod_full.assign(nv, 1.0);
  prod_inner.assign(nv, 1.0);
  double log_scale = 0.0;
  for (int i = 0; i < d; ++i) {
    const double vm = *std::max_element(vp[i], vp[i] + nv);
    const double wm = *std::max_element(wp[i], wp[i] + nw);
    log_scale += vm + wm;
    for (std::int64_t j = 0; j < nv; ++j) ev[j] = std::exp(vp[i][j] - vm);
    for (std::int64_t j = 0; j < nw; ++j) ew[j] = std::exp(wp[i][j] - wm);
    correlate(ev, ew, corr_full);
    for (std::int64_t j = 0; j < nv; ++j)
      if (j < m - mh || j > m + mh) ev[j] = 0.0;
    correlate(ev, ew, corr_inner);
    for (std::int64_t k = 0; k < nv; ++k) {
      prod_full[k] *= std::max(corr_full[k], 0.0);
      prod_inner[k] *= std::max(corr_inner[k], 0.0);
    }
  }
  double total_full = 0.0, total_inner = 0.0;
  for (std::int64_t k = 0; k < nv; ++k) {
    total_full += prod_full[k];
    if (k >= m - mh && k <= m + mh) total_inner += prod_inner[k];
  }
  const double log_kappa = (d + 1) * std::log(s.kappa);
  return {std::exp(best_full - log_scale - std::log(total_full) - log_kappa),
          std::exp(best_inner - log_scale - std::log(total_inner) - log_kappa)};
}

RepValue window_max_rep(const WalkSetup& s, std::uint64_t rep) {
  if (s.m == 0) {
    const double v = std::pow(s.T, -(s.d + 1));
    return {v, v};
  }
  thread_local std::vector<double> v, w;
  make_walks(s, rep, v, w);
  const std::int64_t m = s.m, mh = s.mh;
  const std::int64_t nv = 2 * m + 1, nw = 4 * m + 1;
  std::vector<const double*> vp(s.d), wp(s.d);
  for (int i = 0; i < s.d; ++i) {
    vp[i] = v.data() + i * nv;
    wp[i] = w.data() + i * nw;
  }
  // p in [0, T] sits at j in [m, 2m]; g in [0, T] at k = m + g.
  const double best_full = max_plus(vp, wp, m, 2 * m, m, 2 * m);
  const double full = std::exp(best_full) * std::pow(s.T, -(s.d + 1));
  if (mh == m) return {full, full};
  const double best_inner = max_plus(vp, wp, m, m + mh, m, m + mh);
  return {full, std::exp(best_inner) * std::pow(s.T_inner, -(s.d + 1))};
}

}  // namespace gscan::detail
