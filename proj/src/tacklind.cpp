#include "uniqlab/tacklind.hpp"
#include "uniqlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace uniqlab {

namespace {

// Simpson on [a,b] for r/g(r)
double dyad_integral(const Expr& g, double a, double b) {
  const int n = 64;  // even
  double h = (b - a) / n, sum = 0;
  auto f = [&](double r) {
    double gv = g.eval1(r);
    return gv > 0 ? r / gv : 0.0;
  };
  for (int i = 0; i <= n; ++i) {
    double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    sum += w * f(a + i * h);
  }
  return sum * h / 3;
}

// least-squares slope of y against x
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
  mx /= double(x.size());
  my /= double(x.size());
  double num = 0, den = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return den > 0 ? num / den : 0.0;
}

TacklindVerdict classify_law(double beta, double p, double q, std::string& why) {
  std::ostringstream os;
  // integral of r / (beta r^p log^q r): diverges iff p < 2, or p = 2, q <= 1
  if (beta <= 0 || p <= 0.05) {
    os << "log-volume non-increasing (beta " << beta << ", p " << p << "), growth subcritical";
    why = os.str();
    return TacklindVerdict::satisfied;
  }
  const double tol_p = 0.10, tol_q = 0.20;
  if (p < 2 - tol_p) {
    os << "fitted exponent p " << p << " < 2, within the admissible family";
    why = os.str();
    return TacklindVerdict::satisfied;
  }
  if (p > 2 + tol_p) {
    os << "fitted exponent p " << p << " > 2, super-quadratic log-volume growth";
    why = os.str();
    return TacklindVerdict::violated;
  }
  if (q <= 1 + tol_q) {
    os << "p near 2 with log power q " << q << " <= 1, admissible r^2 log r growth";
    why = os.str();
    return TacklindVerdict::satisfied;
  }
  os << "p near 2 with log power q " << q << " > 1, divergence integral converges";
  why = os.str();
  return TacklindVerdict::violated;
}

} // namespace

TacklindReport tacklind_analytic(const Expr& g) {
  TacklindReport rep;
  rep.mode = "analytic";

  // dyadic ladder 2^3 .. 2^36
  const int j0 = 3, j1 = 36;
  std::vector<double> r, gv;
  for (int j = j0; j <= j1; ++j) {
    double rr = std::ldexp(1.0, j);
    double v = g.eval1(rr);
    if (!std::isfinite(v))
      fail(ErrorCode::bad_parameter, "volume law not finite at r = " + std::to_string(rr));
    r.push_back(rr);
    gv.push_back(v);
  }
  size_t m = r.size();

  // non-growing log-volume: bounded volume, trivially admissible
  if (gv[m - 1] <= std::max(1.0, 1.05 * gv[m / 2])) {
    rep.verdict = TacklindVerdict::satisfied;
    rep.evidence = "log-volume law stops growing on the dyadic ladder (bounded volume)";
    return rep;
  }

  // stage A: ratio against the admissible envelope r^2 log(1+r)
  double qmax_tail = 0, qmid = 0;
  for (size_t i = m / 2; i < m; ++i) {
    double env = r[i] * r[i] * std::log1p(r[i]);
    qmax_tail = std::max(qmax_tail, gv[i] / env);
    if (i == 3 * m / 4) qmid = gv[i] / env;
  }
  double qlast = gv[m - 1] / (r[m - 1] * r[m - 1] * std::log1p(r[m - 1]));
  if (qlast <= 1.02 * qmid || qlast <= qmax_tail * 0.999 + 1e-300) {
    // ratio not increasing toward the tail: dominated by b r^2 log(1+r)
    if (qlast <= 1.02 * qmid) {
      rep.verdict = TacklindVerdict::satisfied;
      std::ostringstream os;
      os << "log-volume / (r^2 log(1+r)) bounded (b ~= " << qmax_tail << ") on the dyadic tail";
      rep.evidence = os.str();
      return rep;
    }
  }

  // stage B: local exponent on the tail
  bool super = true;
  double plast = 0;
  for (size_t i = m - 6; i + 1 < m; ++i) {
    if (gv[i] <= 0 || gv[i + 1] <= 0) { super = false; break; }
    double pj = (std::log(gv[i + 1]) - std::log(gv[i])) / (std::log(r[i + 1]) - std::log(r[i]));
    plast = pj;
    if (pj < 2.05) { super = false; break; }
  }
  if (super) {
    rep.verdict = TacklindVerdict::violated;
    std::ostringstream os;
    os << "local exponent of the log-volume law stays >= 2.05 (last " << plast
       << "), r^(2+eps) growth";
    rep.evidence = os.str();
    return rep;
  }

  // stage C: decay exponent of the dyadic increments of the divergence sum
  std::vector<double> lj, lI;
  for (int j = j1 - 14; j < j1; ++j) {
    double I = dyad_integral(g, std::ldexp(1.0, j), std::ldexp(1.0, j + 1));
    if (I <= 0) continue;
    lj.push_back(std::log(double(j)));
    lI.push_back(std::log(I));
  }
  if (lj.size() >= 8) {
    double s = ls_slope(lj, lI);
    std::ostringstream os;
    os << "dyadic increments of the divergence sum decay like j^" << s;
    if (s <= -1.3) {
      rep.verdict = TacklindVerdict::violated;
      rep.evidence = os.str() + ", summable tail";
      return rep;
    }
    if (s >= -0.7) {
      rep.verdict = TacklindVerdict::satisfied;
      rep.evidence = os.str() + ", non-summable tail";
      return rep;
    }
    rep.evidence = os.str() + ", too close to the summability border";
  } else {
    rep.evidence = "divergence sum increments vanish on the ladder";
  }
  rep.verdict = TacklindVerdict::inconclusive;
  return rep;
}

TacklindReport tacklind_analytic(const std::string& g_text) {
  return tacklind_analytic(Expr::parse(g_text, 0));
}

TacklindReport tacklind_empirical(const GrowthCurve& curve) {
  TacklindReport rep;
  rep.mode = "empirical";

  std::vector<double> r, vol;
  for (size_t i = 0; i < curve.r.size(); ++i)
    if (!curve.truncated[i] && curve.volume[i] > 0) {
      r.push_back(curve.r[i]);
      vol.push_back(curve.volume[i]);
    }
  if (r.size() < 8)
    fail(ErrorCode::insufficient_data,
         "only " + std::to_string(r.size()) + " untruncated radii, need at least 8");

  // saturation: the window exhausts itself, volume growth stalls
  size_t half = 0;
  while (half < r.size() && r[half] < 0.5 * r.back()) ++half;
  if (half < r.size() && vol.back() <= 1.10 * vol[half]) {
    rep.verdict = TacklindVerdict::satisfied;
    std::ostringstream os;
    os << "volume saturates (" << vol[half] << " -> " << vol.back()
       << " over the outer half), bounded volume";
    rep.evidence = os.str();
    return rep;
  }

  // fit log|B(r)| = beta r^p log(1+r)^q on radii where log|B| is usefully
  // positive, i.e. linear least squares in (log beta, p, q)
  std::vector<double> lr, llog, ll;
  for (size_t i = 0; i < r.size(); ++i) {
    double L = std::log(vol[i]);
    if (L > 0.05) {
      lr.push_back(std::log(r[i]));
      llog.push_back(std::log(std::log1p(r[i])));
      ll.push_back(std::log(L));
    }
  }
  if (lr.size() < 8 || std::exp(lr.back() - lr.front()) < 3.0) {
    rep.verdict = TacklindVerdict::inconclusive;
    rep.evidence = "usable radius range too short for a growth fit";
    return rep;
  }
  // normal equations for [1, log r, log log(1+r)]
  double S[3][3] = {}, b[3] = {};
  for (size_t i = 0; i < lr.size(); ++i) {
    double row[3] = {1.0, lr[i], llog[i]};
    for (int a = 0; a < 3; ++a) {
      for (int c = 0; c < 3; ++c) S[a][c] += row[a] * row[c];
      b[a] += row[a] * ll[i];
    }
  }
  // log r and log log(1+r) are nearly collinear on short windows; ridge the
  // q direction slightly so the fit prefers small q
  S[2][2] += 1e-3 * S[0][0];
  // solve 3x3 by Gaussian elimination
  double M[3][4];
  for (int a = 0; a < 3; ++a) {
    for (int c = 0; c < 3; ++c) M[a][c] = S[a][c];
    M[a][3] = b[a];
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int rr = col + 1; rr < 3; ++rr)
      if (std::abs(M[rr][col]) > std::abs(M[piv][col])) piv = rr;
    std::swap(M[col], M[piv]);
    if (std::abs(M[col][col]) < 1e-14) {
      rep.verdict = TacklindVerdict::inconclusive;
      rep.evidence = "degenerate growth fit";
      return rep;
    }
    for (int rr = 0; rr < 3; ++rr)
      if (rr != col) {
        double fac = M[rr][col] / M[col][col];
        for (int c = col; c < 4; ++c) M[rr][c] -= fac * M[col][c];
      }
  }
  double logbeta = M[0][3] / M[0][0];
  rep.p = M[1][3] / M[1][1];
  rep.q = M[2][3] / M[2][2];
  rep.beta = std::exp(logbeta);
  rep.fitted = true;
  double rss = 0;
  for (size_t i = 0; i < lr.size(); ++i) {
    double pred = logbeta + rep.p * lr[i] + rep.q * llog[i];
    rss += (ll[i] - pred) * (ll[i] - pred);
  }
  rep.residual = std::sqrt(rss / double(lr.size()));
  if (rep.residual > 0.25) {
    rep.verdict = TacklindVerdict::inconclusive;
    std::ostringstream os;
    os << "growth fit residual " << rep.residual << " too large to classify";
    rep.evidence = os.str();
    return rep;
  }
  std::string why;
  rep.verdict = classify_law(rep.beta, rep.p, rep.q, why);
  rep.evidence = why;
  return rep;
}

} // namespace uniqlab
