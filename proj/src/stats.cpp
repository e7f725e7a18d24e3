#include "faithful/stats.hpp"

#include "faithful/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace faithful::stats {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / static_cast<double>(x.size() - 1);
}

void require_sample(std::span<const double> x, const char* name) {
  require(x.size() >= 2, std::string(name) + ": sample needs at least 2 observations");
  require(std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); }),
          std::string(name) + ": sample contains non-finite values");
}

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int max_iter = 500;
  constexpr double eps = 1e-16;
  constexpr double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

// I_x(a, b) with y = 1 - x supplied separately to keep precision near x = 1.
double incomplete_beta(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

// Adaptive 15-point Gauss-Kronrod quadrature.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
double gauss_kronrod15(const F& f, double a, double b, double& error) {
  const double centre = 0.5 * (a + b), half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(centre - dx) + f(centre + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  error = std::fabs((kronrod - gauss) * half);
  return kronrod * half;
}

template <class F>
double integrate(const F& f, double a, double b, double tol, int depth = 0) {
  double error = 0.0;
  const double value = gauss_kronrod15(f, a, b, error);
  if (error <= tol || depth >= 30) return value;
  const double mid = 0.5 * (a + b);
  const double sub_tol = std::max(0.5 * tol, 1e-15);
  return integrate(f, a, mid, sub_tol, depth + 1) + integrate(f, mid, b, sub_tol, depth + 1);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// P(range of k standard normals < w).
double normal_range_cdf(double w, int k) {
  if (w <= 0.0) return 0.0;
  constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;
  auto integrand = [w, k](double z) {
    const double inner = normal_cdf(z + w) - normal_cdf(z);
    if (inner <= 0.0) return 0.0;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z) * std::pow(inner, k - 1);
  };
  const double lo = -8.5, hi = 8.5;
  double total = 0.0;
  constexpr int pieces = 8;
  for (int i = 0; i < pieces; ++i) {
    const double a = lo + (hi - lo) * i / pieces, b = lo + (hi - lo) * (i + 1) / pieces;
    total += integrate(integrand, a, b, 1e-12);
  }
  return std::clamp(k * total, 0.0, 1.0);
}

TestResult finish_t(double t, double df, double effect) {
  TestResult r;
  r.statistic = t;
  r.df = df;
  r.pValue = student_t_two_sided_p(t, df);
  r.effectSize = effect;
  return r;
}

}  // namespace

void to_json(nlohmann::json& j, const TestResult& r) {
  j = nlohmann::json{{"statistic", r.statistic}, {"df", r.df}, {"pValue", r.pValue}};
  j["adjustedP"] = r.adjustedP ? nlohmann::json(*r.adjustedP) : nlohmann::json(nullptr);
  j["effectSize"] = r.effectSize ? nlohmann::json(*r.effectSize) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, TestResult& r) {
  r.statistic = j.at("statistic").get<double>();
  r.df = j.at("df").get<double>();
  r.pValue = j.at("pValue").get<double>();
  auto opt = [&j](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
  };
  r.adjustedP = opt("adjustedP");
  r.effectSize = opt("effectSize");
}

GroupSummary GroupSummary::of(std::span<const double> sample) {
  require_sample(sample, "GroupSummary");
  return {stats::mean(sample), std::sqrt(variance(sample)), static_cast<int>(sample.size())};
}

void to_json(nlohmann::json& j, const GroupSummary& g) {
  j = nlohmann::json{{"mean", g.mean}, {"sd", g.sd}, {"n", g.n}};
}

void from_json(const nlohmann::json& j, GroupSummary& g) {
  g.mean = j.at("mean").get<double>();
  g.sd = j.at("sd").get<double>();
  g.n = j.at("n").get<int>();
}

double regularized_incomplete_beta(double a, double b, double x) {
  require(a > 0.0 && b > 0.0, "incomplete beta: shape parameters must be positive");
  require(x >= 0.0 && x <= 1.0, "incomplete beta: x outside [0, 1]");
  return incomplete_beta(a, b, x, 1.0 - x);
}

double student_t_two_sided_p(double t, double df) {
  require(df > 0.0, "student t: df must be positive");
  if (std::isnan(t)) throw NumericError("student_t", "statistic is NaN");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  const double p = incomplete_beta(0.5 * df, 0.5, df / (df + t2), t2 / (df + t2));
  return std::clamp(p, 0.0, 1.0);
}

double student_t_cdf(double t, double df) {
  if (t == 0.0) return 0.5;
  const double tail = 0.5 * student_t_two_sided_p(t, df);
  return t > 0.0 ? 1.0 - tail : tail;
}

double f_survival(double f, double df1, double df2) {
  require(df1 > 0.0 && df2 > 0.0, "F distribution: df must be positive");
  if (!(f > 0.0)) return 1.0;
  if (std::isinf(f)) return 0.0;
  const double denom = df2 + df1 * f;
  return std::clamp(incomplete_beta(0.5 * df2, 0.5 * df1, df2 / denom, df1 * f / denom), 0.0, 1.0);
}

double studentized_range_cdf(double q, int k, double df) {
  require(k >= 2, "studentized range: need at least 2 groups");
  require(df > 0.0, "studentized range: df must be positive");
  if (q <= 0.0) return 0.0;
  if (std::isinf(df) || df > 1e6) return normal_range_cdf(q, k);

  // Density of s = chi_df / sqrt(df), in log form.
  const double log_norm =
      0.5 * df * std::log(df) - std::lgamma(0.5 * df) - (0.5 * df - 1.0) * std::log(2.0);
  auto integrand = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double log_density = log_norm + (df - 1.0) * std::log(s) - 0.5 * df * s * s;
    return std::exp(log_density) * normal_range_cdf(q * s, k);
  };
  const double upper = std::sqrt((df + 10.0 * std::sqrt(2.0 * df) + 60.0) / df);
  constexpr int pieces = 12;
  double total = 0.0;
  for (int i = 0; i < pieces; ++i)
    total += integrate(integrand, upper * i / pieces, upper * (i + 1) / pieces, 1e-10);
  return std::clamp(total, 0.0, 1.0);
}

double studentized_range_critical(double alpha, int k, double df) {
  require(alpha > 0.0 && alpha < 1.0, "studentized range: alpha must lie in (0, 1)");
  double lo = 0.0, hi = 1.0;
  while (studentized_range_cdf(hi, k, df) < 1.0 - alpha) {
    hi *= 2.0;
    if (hi > 1e4) throw NumericError("studentized_range", "critical value did not bracket");
  }
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (studentized_range_cdf(mid, k, df) < 1.0 - alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TestResult t_from_summary(double mean_a, double sd_a, int n_a, double mean_b, double sd_b, int n_b) {
  require(n_a >= 2 && n_b >= 2, "t-test: each group needs n >= 2");
  require(sd_a >= 0.0 && sd_b >= 0.0 && std::isfinite(sd_a) && std::isfinite(sd_b),
          "t-test: standard deviations must be finite and nonnegative");
  require(std::isfinite(mean_a) && std::isfinite(mean_b), "t-test: means must be finite");
  require(sd_a > 0.0 || sd_b > 0.0, "t-test: both groups have zero variance");
  const double va = sd_a * sd_a / n_a, vb = sd_b * sd_b / n_b;
  const double se2 = va + vb;
  const double t = (mean_a - mean_b) / std::sqrt(se2);
  const double df = se2 * se2 / (va * va / (n_a - 1) + vb * vb / (n_b - 1));
  return finish_t(t, df, cohens_d(mean_a, sd_a, mean_b, sd_b));
}

TestResult t_from_summary(const GroupSummary& a, const GroupSummary& b) {
  return t_from_summary(a.mean, a.sd, a.n, b.mean, b.sd, b.n);
}

TestResult welch_t(std::span<const double> a, std::span<const double> b) {
  require_sample(a, "welch_t");
  require_sample(b, "welch_t");
  return t_from_summary(GroupSummary::of(a), GroupSummary::of(b));
}

TestResult paired_t(std::span<const double> a, std::span<const double> b) {
  require_sample(a, "paired_t");
  require_sample(b, "paired_t");
  require(a.size() == b.size(), "paired_t: samples differ in length");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const double sd = std::sqrt(variance(diff));
  require(sd > 0.0, "paired_t: differences have zero variance");
  const double n = static_cast<double>(diff.size());
  const GroupSummary ga = GroupSummary::of(a), gb = GroupSummary::of(b);
  return finish_t(mean(diff) / (sd / std::sqrt(n)), n - 1.0, cohens_d(ga.mean, ga.sd, gb.mean, gb.sd));
}

TestResult pooled_t(std::span<const double> a, std::span<const double> b) {
  require_sample(a, "pooled_t");
  require_sample(b, "pooled_t");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double df = na + nb - 2.0;
  const double pooled = ((na - 1.0) * variance(a) + (nb - 1.0) * variance(b)) / df;
  require(pooled > 0.0, "pooled_t: both groups have zero variance");
  const double t = (mean(a) - mean(b)) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  const GroupSummary ga = GroupSummary::of(a), gb = GroupSummary::of(b);
  return finish_t(t, df, cohens_d(ga.mean, ga.sd, gb.mean, gb.sd));
}

TestResult t_test(std::span<const double> a, std::span<const double> b, TTestKind kind) {
  return kind == TTestKind::Paired ? paired_t(a, b) : welch_t(a, b);
}

std::vector<double> benjamini_hochberg(std::span<const double> p_values) {
  for (double p : p_values) require(p >= 0.0 && p <= 1.0, "benjamini_hochberg: p outside [0, 1]");
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return p_values[i] < p_values[j]; });
  std::vector<double> adjusted(m);
  double running = 1.0;
  for (std::size_t r = m; r-- > 0;) {
    const std::size_t idx = order[r];
    running = std::min(running, p_values[idx] * static_cast<double>(m) / static_cast<double>(r + 1));
    adjusted[idx] = running;
  }
  return adjusted;
}

double cohens_d(double mean_a, double sd_a, double mean_b, double sd_b) {
  require(sd_a >= 0.0 && sd_b >= 0.0, "cohens_d: standard deviations must be nonnegative");
  const double diff = std::fabs(mean_a - mean_b);
  const double pooled = std::sqrt((sd_a * sd_a + sd_b * sd_b) / 2.0);
  if (pooled == 0.0) {
    require(diff == 0.0, "cohens_d: undefined for zero variance with unequal means");
    return 0.0;
  }
  return diff / pooled;
}

const AnovaRow& AnovaTable::row(const std::string& source) const {
  for (const AnovaRow& r : effects)
    if (r.source == source) return r;
  throw LookupError("no ANOVA row named '" + source + "'");
}

void to_json(nlohmann::json& j, const AnovaRow& r) {
  j = nlohmann::json{{"source", r.source}, {"sumSquares", r.sumSquares}, {"df", r.df},
                     {"meanSquare", r.meanSquare}, {"F", r.F},           {"pValue", r.pValue}};
}

void to_json(nlohmann::json& j, const AnovaTable& t) {
  j = nlohmann::json{{"effects", t.effects},
                     {"residual", t.residual},
                     {"totalSumSquares", t.totalSumSquares}};
}

AnovaTable anova(const std::vector<std::string>& factors, std::span<const Observation> observations,
                 bool two_way_interactions) {
  const std::size_t nf = factors.size();
  require(nf >= 1, "anova: need at least one factor");
  require(!observations.empty(), "anova: no observations");
  for (const Observation& o : observations) {
    require(o.levels.size() == nf, "anova: observation has the wrong number of factor levels");
    require(std::isfinite(o.response), "anova: non-finite response");
  }

  std::vector<std::vector<std::string>> levels(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    std::set<std::string> seen;
    for (const Observation& o : observations) seen.insert(o.levels[f]);
    levels[f].assign(seen.begin(), seen.end());
  }
  std::map<std::vector<std::string>, int> cells;
  for (const Observation& o : observations) ++cells[o.levels];
  std::size_t expected_cells = 1;
  for (const auto& l : levels) expected_cells *= l.size();
  const int replicates = cells.begin()->second;
  require(cells.size() == expected_cells, "anova: design is not full factorial");
  for (const auto& [cell, count] : cells)
    require(count == replicates, "anova: design is unbalanced");
  require(replicates >= 2, "anova: need at least 2 replicates per cell");

  // Centering on one observation leaves the decomposition unchanged and makes
  // a constant response produce exact zeros.
  const double origin = observations[0].response;
  const double n = static_cast<double>(observations.size());
  std::vector<double> y;
  for (const Observation& o : observations) y.push_back(o.response - origin);
  const double grand = std::accumulate(y.begin(), y.end(), 0.0) / n;

  auto level_index = [&](std::size_t f, const std::string& level) {
    return static_cast<std::size_t>(
        std::lower_bound(levels[f].begin(), levels[f].end(), level) - levels[f].begin());
  };

  std::vector<std::vector<double>> main_effect(nf);
  AnovaTable table;
  for (std::size_t f = 0; f < nf; ++f) {
    const std::size_t nl = levels[f].size();
    std::vector<double> sum(nl, 0.0), count(nl, 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const std::size_t li = level_index(f, observations[i].levels[f]);
      sum[li] += y[i];
      count[li] += 1.0;
    }
    main_effect[f].resize(nl);
    double ss = 0.0;
    for (std::size_t l = 0; l < nl; ++l) {
      main_effect[f][l] = sum[l] / count[l] - grand;
      ss += count[l] * main_effect[f][l] * main_effect[f][l];
    }
    table.effects.push_back({factors[f], ss, static_cast<double>(nl - 1)});
  }

  struct Interaction {
    std::size_t f, g;
    std::vector<double> effect;  // indexed lf * |levels g| + lg
  };
  std::vector<Interaction> interactions;
  if (two_way_interactions) {
    for (std::size_t f = 0; f < nf; ++f)
      for (std::size_t g = f + 1; g < nf; ++g) {
        const std::size_t nl_f = levels[f].size(), nl_g = levels[g].size();
        std::vector<double> sum(nl_f * nl_g, 0.0), count(nl_f * nl_g, 0.0);
        for (std::size_t i = 0; i < y.size(); ++i) {
          const std::size_t c = level_index(f, observations[i].levels[f]) * nl_g +
                                level_index(g, observations[i].levels[g]);
          sum[c] += y[i];
          count[c] += 1.0;
        }
        Interaction inter{f, g, std::vector<double>(nl_f * nl_g)};
        double ss = 0.0;
        for (std::size_t lf = 0; lf < nl_f; ++lf)
          for (std::size_t lg = 0; lg < nl_g; ++lg) {
            const std::size_t c = lf * nl_g + lg;
            const double e = sum[c] / count[c] - grand - main_effect[f][lf] - main_effect[g][lg];
            inter.effect[c] = e;
            ss += count[c] * e * e;
          }
        table.effects.push_back({factors[f] + ":" + factors[g], ss,
                                 static_cast<double>((nl_f - 1) * (nl_g - 1))});
        interactions.push_back(std::move(inter));
      }
  }

  double residual_ss = 0.0, total_ss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double fitted = grand;
    for (std::size_t f = 0; f < nf; ++f)
      fitted += main_effect[f][level_index(f, observations[i].levels[f])];
    for (const Interaction& inter : interactions)
      fitted += inter.effect[level_index(inter.f, observations[i].levels[inter.f]) *
                                 levels[inter.g].size() +
                             level_index(inter.g, observations[i].levels[inter.g])];
    residual_ss += (y[i] - fitted) * (y[i] - fitted);
    total_ss += (y[i] - grand) * (y[i] - grand);
  }
  double model_df = 0.0;
  for (const AnovaRow& r : table.effects) model_df += r.df;
  const double residual_df = n - 1.0 - model_df;
  require(residual_df > 0.0, "anova: no residual degrees of freedom");

  table.residual = {"Residual", residual_ss, residual_df, residual_ss / residual_df, 0.0, 1.0};
  table.totalSumSquares = total_ss;
  for (AnovaRow& r : table.effects) {
    r.meanSquare = r.df > 0.0 ? r.sumSquares / r.df : 0.0;
    if (r.meanSquare == 0.0) {
      r.F = 0.0;
      r.pValue = 1.0;
    } else if (table.residual.meanSquare == 0.0) {
      r.F = kInf;
      r.pValue = 0.0;
    } else {
      r.F = r.meanSquare / table.residual.meanSquare;
      r.pValue = f_survival(r.F, r.df, residual_df);
    }
  }
  return table;
}

std::vector<PairwiseResult> tukey_hsd(const std::vector<std::vector<double>>& groups) {
  require(groups.size() >= 2, "tukey_hsd: need at least 2 groups");
  const int k = static_cast<int>(groups.size());
  double n_total = 0.0, within = 0.0;
  std::vector<double> means;
  for (const auto& g : groups) {
    require_sample(g, "tukey_hsd");
    means.push_back(mean(g));
    within += variance(g) * static_cast<double>(g.size() - 1);
    n_total += static_cast<double>(g.size());
  }
  const double df = n_total - k;
  const double mse = within / df;
  require(mse > 0.0, "tukey_hsd: all groups have zero variance");

  std::vector<PairwiseResult> out;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const double se = std::sqrt(mse / 2.0 * (1.0 / groups[i].size() + 1.0 / groups[j].size()));
      const double diff = means[i] - means[j];
      PairwiseResult r;
      r.groupA = i;
      r.groupB = j;
      r.meanDifference = diff;
      r.result.statistic = std::fabs(diff) / se;
      r.result.df = df;
      const double p =
          r.result.statistic == 0.0 ? 1.0 : 1.0 - studentized_range_cdf(r.result.statistic, k, df);
      r.result.pValue = std::clamp(p, 0.0, 1.0);
      r.result.adjustedP = r.result.pValue;
      out.push_back(r);
    }
  return out;
}

}  // namespace faithful::stats
