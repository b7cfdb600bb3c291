#include "sfd/selftest/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "sfd/core/autograd.hpp"
#include "sfd/core/error.hpp"
#include "sfd/core/kinks.hpp"
#include "sfd/core/rng.hpp"

namespace sfd::oracle {

std::vector<Cd> dft2(const std::vector<Cd>& x, std::size_t h, std::size_t w) {
  std::vector<Cd> out(h * w);
  for (std::size_t u = 0; u < h; ++u) {
    for (std::size_t v = 0; v < w; ++v) {
      Cd acc{};
      for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
          const double ang = -2.0 * std::numbers::pi *
                             (static_cast<double>((u * r) % h) / static_cast<double>(h) +
                              static_cast<double>((v * c) % w) / static_cast<double>(w));
          acc += x[r * w + c] * Cd(std::cos(ang), std::sin(ang));
        }
      }
      out[u * w + v] = acc;
    }
  }
  return out;
}

std::vector<double> idft2_real(const std::vector<Cd>& f, std::size_t h, std::size_t w) {
  std::vector<double> out(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (std::size_t u = 0; u < h; ++u) {
        for (std::size_t v = 0; v < w; ++v) {
          const double ang = 2.0 * std::numbers::pi *
                             (static_cast<double>((u * r) % h) / static_cast<double>(h) +
                              static_cast<double>((v * c) % w) / static_cast<double>(w));
          acc += (f[u * w + v] * Cd(std::cos(ang), std::sin(ang))).real();
        }
      }
      out[r * w + c] = acc / static_cast<double>(h * w);
    }
  }
  return out;
}

std::vector<double> conv2d(const std::vector<Real>& x, std::int64_t cin, std::int64_t h, std::int64_t w,
                           const std::vector<Real>& weight, std::int64_t cout, std::int64_t k,
                           const std::vector<Real>& bias, int padding) {
  const std::int64_t oh = h + 2 * padding - k + 1, ow = w + 2 * padding - k + 1;
  std::vector<double> out(static_cast<std::size_t>(cout * oh * ow));
  for (std::int64_t o = 0; o < cout; ++o)
    for (std::int64_t i = 0; i < oh; ++i)
      for (std::int64_t j = 0; j < ow; ++j) {
        double acc = bias.empty() ? 0.0 : bias[o];
        for (std::int64_t c = 0; c < cin; ++c)
          for (std::int64_t ky = 0; ky < k; ++ky)
            for (std::int64_t kx = 0; kx < k; ++kx) {
              const std::int64_t y = i + ky - padding, xx = j + kx - padding;
              if (y < 0 || y >= h || xx < 0 || xx >= w) continue;
              acc += static_cast<double>(weight[((o * cin + c) * k + ky) * k + kx]) * x[(c * h + y) * w + xx];
            }
        out[(o * oh + i) * ow + j] = acc;
      }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> sobel(const std::vector<Real>& x, std::int64_t c, std::int64_t h,
                                                          std::int64_t w) {
  auto px = [&](std::int64_t ch, std::int64_t i, std::int64_t j) -> double {
    i = std::clamp<std::int64_t>(i, 0, h - 1);  // replicated border
    j = std::clamp<std::int64_t>(j, 0, w - 1);
    return x[(ch * h + i) * w + j];
  };
  std::vector<double> gx(x.size()), gy(x.size());
  for (std::int64_t ch = 0; ch < c; ++ch)
    for (std::int64_t i = 0; i < h; ++i)
      for (std::int64_t j = 0; j < w; ++j) {
        gx[(ch * h + i) * w + j] = (px(ch, i - 1, j + 1) + 2 * px(ch, i, j + 1) + px(ch, i + 1, j + 1)) -
                                   (px(ch, i - 1, j - 1) + 2 * px(ch, i, j - 1) + px(ch, i + 1, j - 1));
        gy[(ch * h + i) * w + j] = (px(ch, i + 1, j - 1) + 2 * px(ch, i + 1, j) + px(ch, i + 1, j + 1)) -
                                   (px(ch, i - 1, j - 1) + 2 * px(ch, i - 1, j) + px(ch, i - 1, j + 1));
      }
  return {gx, gy};
}

double ssim(const std::vector<double>& a, const std::vector<double>& b, std::int64_t h, std::int64_t w, int window,
            double sigma, double c1, double c2) {
  std::vector<double> win(static_cast<std::size_t>(window * window));
  double total = 0.0;
  const double ctr = (window - 1) / 2.0;
  for (int i = 0; i < window; ++i)
    for (int j = 0; j < window; ++j) {
      const double v = std::exp(-((i - ctr) * (i - ctr) + (j - ctr) * (j - ctr)) / (2 * sigma * sigma));
      win[i * window + j] = v;
      total += v;
    }
  for (auto& v : win) v /= total;
  double acc = 0.0;
  std::int64_t count = 0;
  for (std::int64_t i = 0; i + window <= h; ++i)
    for (std::int64_t j = 0; j + window <= w; ++j) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int di = 0; di < window; ++di)
        for (int dj = 0; dj < window; ++dj) {
          const double g = win[di * window + dj];
          const double va = a[(i + di) * w + j + dj], vb = b[(i + di) * w + j + dj];
          ma += g * va;
          mb += g * vb;
          saa += g * va * va;
          sbb += g * vb * vb;
          sab += g * va * vb;
        }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return acc / static_cast<double>(count);
}

double masked_pearson(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& mask,
                      double eps) {
  double n = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (mask[i] > 0.5) {
      n += 1;
      sx += x[i];
      sy += y[i];
    }
  if (n == 0) return 0.0;
  const double mx = sx / n, my = sy / n;
  double cxy = 0, cxx = 0, cyy = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (mask[i] > 0.5) {
      cxy += (x[i] - mx) * (y[i] - my);
      cxx += (x[i] - mx) * (x[i] - mx);
      cyy += (y[i] - my) * (y[i] - my);
    }
  return (cxy / n) / std::sqrt((cxx / n + eps) * (cyy / n + eps));
}

int otsu_exhaustive(const std::vector<int>& levels) {
  int best_t = 0;
  double best = -1.0;
  const double n = static_cast<double>(levels.size());
  for (int t = 0; t < 256; ++t) {
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (int v : levels) {
      if (v <= t) {
        n0 += 1;
        s0 += v;
      } else {
        n1 += 1;
        s1 += v;
      }
    }
    if (n0 == 0 || n1 == 0) continue;
    const double m0 = s0 / n0, m1 = s1 / n1;
    const double between = (n0 / n) * (n1 / n) * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

double entropy(const std::vector<int>& q) {
  std::vector<double> hist(256, 0.0);
  for (int v : q) hist[v] += 1;
  double e = 0;
  for (double c : hist)
    if (c > 0) {
      const double p = c / static_cast<double>(q.size());
      e -= p * std::log2(p);
    }
  return e;
}

double stddev_two_pass(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

double spatial_frequency(const std::vector<double>& v, std::int64_t h, std::int64_t w) {
  double rf = 0, cf = 0;
  for (std::int64_t i = 0; i < h; ++i)
    for (std::int64_t j = 1; j < w; ++j) rf += std::pow(v[i * w + j] - v[i * w + j - 1], 2);
  for (std::int64_t i = 1; i < h; ++i)
    for (std::int64_t j = 0; j < w; ++j) cf += std::pow(v[i * w + j] - v[(i - 1) * w + j], 2);
  rf = w > 1 ? rf / static_cast<double>(h * (w - 1)) : 0.0;
  cf = h > 1 ? cf / static_cast<double>((h - 1) * w) : 0.0;
  return std::sqrt(rf + cf);
}

double mutual_information(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<double> joint(256 * 256, 0.0), pa(256, 0.0), pb(256, 0.0);
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[a[i] * 256 + b[i]] += 1.0 / n;
    pa[a[i]] += 1.0 / n;
    pb[b[i]] += 1.0 / n;
  }
  double mi = 0;
  for (int x = 0; x < 256; ++x)
    for (int y = 0; y < 256; ++y) {
      const double p = joint[x * 256 + y];
      if (p > 0) mi += p * std::log2(p / (pa[x] * pb[y]));
    }
  return mi;
}

double qabf(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& f, std::int64_t h,
            std::int64_t w) {
  auto px = [&](const std::vector<double>& img, std::int64_t i, std::int64_t j) {
    return img[std::clamp<std::int64_t>(i, 0, h - 1) * w + std::clamp<std::int64_t>(j, 0, w - 1)];
  };
  auto edge = [&](const std::vector<double>& img, std::int64_t i, std::int64_t j, double& g, double& alpha) {
    double sx = 0, sy = 0;
    const int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        sx += kx[di + 1][dj + 1] * px(img, i + di, j + dj);
        sy += kx[dj + 1][di + 1] * px(img, i + di, j + dj);
      }
    g = std::sqrt(sx * sx + sy * sy);
    alpha = sx == 0 ? std::numbers::pi / 2 : std::atan(sy / sx);
  };
  auto preserve = [](double gs, double as, double gf, double af) {
    const double G = (gs == 0 && gf == 0) ? 0.0 : std::min(gs, gf) / std::max(gs, gf);
    const double A = 1 - std::abs(as - af) / (std::numbers::pi / 2);
    const double qg = 0.9994 / (1 + std::exp(-15 * (G - 0.5)));
    const double qa = 0.9879 / (1 + std::exp(-22 * (A - 0.8)));
    return qg * qa;
  };
  double num = 0, den = 0;
  for (std::int64_t i = 0; i < h; ++i)
    for (std::int64_t j = 0; j < w; ++j) {
      double ga, aa, gb, ab, gf, af;
      edge(a, i, j, ga, aa);
      edge(b, i, j, gb, ab);
      edge(f, i, j, gf, af);
      num += preserve(ga, aa, gf, af) * ga + preserve(gb, ab, gf, af) * gb;
      den += ga + gb;
    }
  return den == 0 ? 0.0 : num / den;
}

double vif(const std::vector<double>& ref_in, const std::vector<double>& dist_in, std::int64_t h, std::int64_t w) {
  std::vector<double> ref = ref_in, dist = dist_in;
  double num = 0, den = 0;
  for (int scale = 1; scale <= 4; ++scale) {
    const int n = (1 << (5 - scale)) + 1;
    const double sigma = n / 5.0;
    std::vector<double> win(n * n);
    double total = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const double da = a - (n - 1) / 2.0, db = b - (n - 1) / 2.0;
        win[a * n + b] = std::exp(-(da * da + db * db) / (2 * sigma * sigma));
        total += win[a * n + b];
      }
    for (auto& x : win) x /= total;
    // window moments at every valid top-left position
    auto moments = [&](const std::vector<double>& x, const std::vector<double>& y, std::int64_t i, std::int64_t j) {
      std::array<double, 5> m{};  // mx, my, sxx, syy, sxy
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const double k = win[a * n + b], xv = x[(i + a) * w + j + b], yv = y[(i + a) * w + j + b];
          m[0] += k * xv;
          m[1] += k * yv;
          m[2] += k * xv * xv;
          m[3] += k * yv * yv;
          m[4] += k * xv * yv;
        }
      return m;
    };
    if (scale > 1) {
      if (h < n || w < n) break;
      const std::int64_t vh = h - n + 1, vw = w - n + 1;
      const std::int64_t nh = (vh + 1) / 2, nw = (vw + 1) / 2;
      std::vector<double> r2(nh * nw), d2(nh * nw);
      for (std::int64_t i = 0; i < nh; ++i)
        for (std::int64_t j = 0; j < nw; ++j) {
          auto m = moments(ref, dist, 2 * i, 2 * j);
          r2[i * nw + j] = m[0];
          d2[i * nw + j] = m[1];
        }
      ref = std::move(r2);
      dist = std::move(d2);
      h = nh;
      w = nw;
    }
    if (h < n || w < n) break;
    for (std::int64_t i = 0; i + n <= h; ++i)
      for (std::int64_t j = 0; j + n <= w; ++j) {
        auto m = moments(ref, dist, i, j);
        double v1 = std::max(0.0, m[2] - m[0] * m[0]);
        const double v2 = std::max(0.0, m[3] - m[1] * m[1]);
        const double c = m[4] - m[0] * m[1];
        double g = c / (v1 + 1e-10), sv = v2 - g * c;
        if (v1 < 1e-10) g = 0, sv = v2, v1 = 0;
        if (v2 < 1e-10) g = 0, sv = 0;
        if (g < 0) sv = v2, g = 0;
        sv = std::max(sv, 1e-10);
        num += std::log2(1 + g * g * v1 / (sv + 2.0));
        den += std::log2(1 + v1 / 2.0);
      }
  }
  return den <= 0 ? 0.0 : num / den;
}

GradCheckResult grad_check(const std::function<Tensor()>& loss_fn,
                           const std::vector<std::pair<std::string, Tensor>>& params,
                           const GradCheckOptions& options) {
  for (const auto& [name, p] : params) {
    if (!p.is_leaf()) throw ContractError("grad_check: " + name + " is not a leaf");
    Tensor(p).zero_grad();
  }
  {
    GradTape tape;
    TapeScope scope(tape);
    Tensor loss = loss_fn();
    tape.backward(loss);
  }
  kinks::Trace base;
  {
    NoGradScope ng;
    kinks::TraceScope ts(base);
    loss_fn();
  }

  Rng rng(options.seed);
  GradCheckResult result;
  for (const auto& [name, param] : params) {
    Tensor p = param;
    const auto n = static_cast<std::size_t>(p.numel());
    const bool exhaustive = n <= options.max_samples;
    std::vector<double> analytic, numeric;
    std::size_t skipped = 0, reduced = 0;
    const std::size_t budget = exhaustive ? n : options.max_samples * 8;
    for (std::size_t attempt = 0; attempt < budget && analytic.size() < options.max_samples; ++attempt) {
      const std::size_t i = exhaustive ? attempt : static_cast<std::size_t>(rng.below(n));
      auto data = p.mutable_data();
      const Real orig = data[i];
      // The configured step first; smaller ones only when it crosses a kink.
      bool found = false;
      double numeric_value = 0.0;
      double step = options.step;
      for (int level = 0; level <= options.kink_retries && !found; ++level, step *= 0.1) {
        const Real hi = orig + static_cast<Real>(step);
        const Real lo = orig - static_cast<Real>(step);
        double lp, lm;
        kinks::Trace tp, tm;
        {
          NoGradScope ng;
          data[i] = hi;
          {
            kinks::TraceScope ts(tp);
            lp = loss_fn().item();
          }
          data[i] = lo;
          {
            kinks::TraceScope ts(tm);
            lm = loss_fn().item();
          }
          data[i] = orig;
        }
        if (tp.signatures == base.signatures && tm.signatures == base.signatures) {
          found = true;
          numeric_value = (lp - lm) / (static_cast<double>(hi) - static_cast<double>(lo));
          if (level > 0) ++reduced;
        }
      }
      if (!found) {
        ++skipped;
        continue;
      }
      numeric.push_back(numeric_value);
      analytic.push_back(p.has_grad() ? p.grad()[i] : 0.0);
    }
    double na = 0, nn = 0, nd = 0;
    for (std::size_t k = 0; k < analytic.size(); ++k) {
      na += analytic[k] * analytic[k];
      nn += numeric[k] * numeric[k];
      nd += (analytic[k] - numeric[k]) * (analytic[k] - numeric[k]);
    }
    na = std::sqrt(na);
    nn = std::sqrt(nn);
    nd = std::sqrt(nd);
    const double denom = std::max(na, nn);
    double rel = 0.0;
    if (denom < 1e-6) rel = nd < 1e-6 ? 0.0 : 1.0;
    else rel = nd / denom;
    if (analytic.empty()) rel = 1.0;  // every perturbation crossed a kink
    result.tensors.push_back({name, analytic.size(), reduced, skipped, na, nn, rel});
    if (result.worst_name.empty() || rel > result.worst_rel_error) {
      result.worst_rel_error = rel;
      result.worst_name = name;
    }
    if (!(rel < options.tolerance)) result.ok = false;
  }
  return result;
}

}  // namespace sfd::oracle
