#include "output.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace csprop::cli {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";  // folds -0
  // Shortest representation that reads back to the same double.
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& comment,
                     const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  out_ << "# " << comment << '\n';
  for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
  out_ << '\n';
}

void CsvWriter::sep() {
  if (!first_) out_ << ',';
  first_ = false;
}

CsvWriter& CsvWriter::num(double x) {
  sep();
  out_ << format_number(x);
  return *this;
}

CsvWriter& CsvWriter::num(std::optional<double> x) {
  return num(x ? *x : std::nan(""));
}

CsvWriter& CsvWriter::integer(long x) {
  sep();
  out_ << x;
  return *this;
}

CsvWriter& CsvWriter::text(const std::string& s) {
  sep();
  out_ << s;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
  ++rows_;
  if (!out_) throw std::runtime_error("write failed: " + path_.string());
}

namespace {

const char* kUnits =
    "z = (q/b + i p/c)/sqrt(2), b c = hbar; w shifts the initial point: "
    "Q(0) = q' + w, P(0) = p' + i (c/b) w";

WrittenFile done(const CsvWriter& w) { return {w.path().filename().string(), w.rows()}; }

}  // namespace

WrittenFile write_wmap(const std::filesystem::path& path, const WMap& map) {
  CsvWriter w(path,
              std::string("w-plane map at T = ") + format_number(map.T) +
                  "; w = alpha + i beta; Qpp, Ppp are the real labels reached, "
                  "v(T) = (Qpp/b - i Ppp/c)/sqrt(2); " + kUnits,
              {"alpha", "beta", "Qpp", "Ppp", "diverged"});
  for (int j = 0; j < map.grid.n_beta; ++j)
    for (int i = 0; i < map.grid.n_alpha; ++i) {
      const std::size_t k = map.index(i, j);
      w.num(map.grid.alpha(i)).num(map.grid.beta(j));
      if (map.diverged[k])
        w.num(std::nan("")).num(std::nan(""));
      else
        w.num(map.Qpp[k]).num(map.Ppp[k]);
      w.integer(map.diverged[k] ? 1 : 0).end_row();
    }
  return done(w);
}

WrittenFile write_seeds(const std::filesystem::path& path, const std::vector<cplx>& seeds,
                        const std::vector<std::optional<Root>>& refined) {
  CsvWriter w(path,
              std::string("grid seeds (sign changes of Qpp-q'' and Ppp-p'') and their Newton "
                          "refinement; |M_vv| of the refined root; ") + kUnits,
              {"seed_alpha", "seed_beta", "converged", "Re(w)", "Im(w)", "|M_vv|", "contributing"});
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    w.num(seeds[k].real()).num(seeds[k].imag());
    if (refined[k]) {
      const Root& r = *refined[k];
      w.integer(1).num(r.w[0].real()).num(r.w[0].imag()).num(r.caustic_distance);
      w.integer(r.contributing ? 1 : 0);
    } else {
      w.integer(0).num(std::nan("")).num(std::nan("")).num(std::nan("")).integer(0);
    }
    w.end_row();
  }
  return done(w);
}

WrittenFile write_families(const std::filesystem::path& path, const FamilySearch& search) {
  int dof = 1;
  for (const auto& f : search.families)
    if (!f.roots.empty()) dof = f.roots.front().w.size();
  std::vector<std::string> header = {"T"};
  if (dof == 1) {
    header.insert(header.end(), {"Re(w)", "Im(w)"});
  } else {
    header.insert(header.end(), {"Re(w1)", "Im(w1)", "Re(w2)", "Im(w2)"});
  }
  header.insert(header.end(), {"|M_vv|", "contributing", "family_id", "flags"});
  CsvWriter w(path,
              std::string("selected root families; |M_vv| is |det M_vv| for two degrees of "
                          "freedom; flags: caustic_proximate, truncated (family lost after this "
                          "T), gap (continuation failed at this T); ") + kUnits,
              header);
  for (const auto& f : search.families) {
    // Roots and gaps merged in T order.
    std::size_t g = 0;
    auto gap_row = [&](double T) {
      w.num(T);
      for (int k = 0; k < 2 * dof; ++k) w.num(std::nan(""));
      w.num(std::nan("")).integer(0).text(f.id).text("gap").end_row();
    };
    for (std::size_t k = 0; k < f.roots.size(); ++k) {
      const Root& r = f.roots[k];
      while (g < f.gaps.size() && f.gaps[g] < r.T) gap_row(f.gaps[g++]);
      w.num(r.T);
      for (int d = 0; d < dof; ++d) w.num(r.w[d].real()).num(r.w[d].imag());
      std::string flags;
      if (r.caustic_proximate) flags = "caustic_proximate";
      if (f.truncated && k + 1 == f.roots.size()) flags += flags.empty() ? "truncated" : ";truncated";
      w.num(r.caustic_distance).integer(r.contributing ? 1 : 0).text(f.id).text(flags).end_row();
    }
    while (g < f.gaps.size()) gap_row(f.gaps[g++]);
  }
  return done(w);
}

WrittenFile write_caustics(const std::filesystem::path& path,
                           const std::vector<CausticEvent>& events) {
  CsvWriter w(path,
              "caustic events between family pairs: closest approach in w (T_star, w_star, "
              "min_w_distance, T_min_distance) and smallest sqrt(|M_vv,a| |M_vv,b|)",
              {"family_a", "family_b", "T_star", "Re(w_star)", "Im(w_star)", "min_sqrt_mvv",
               "T_min_mvv", "min_w_distance", "T_min_distance"});
  for (const auto& e : events)
    w.text(e.family_a)
        .text(e.family_b)
        .num(e.T_star)
        .num(e.w_star.real())
        .num(e.w_star.imag())
        .num(e.min_abs_mvv)
        .num(e.T_min_mvv)
        .num(e.min_w_distance)
        .num(e.T_min_distance)
        .end_row();
  return done(w);
}

WrittenFile write_exact(const std::filesystem::path& path, const ExactCurve& curve) {
  CsvWriter w(path, "exact propagator K(T) = <z''|exp(-i H T/hbar)|z'> for normalized states",
              {"T", "ReK", "ImK", "absK"});
  for (std::size_t k = 0; k < curve.T.size(); ++k)
    w.num(curve.T[k]).num(curve.K[k].real()).num(curve.K[k].imag()).num(std::abs(curve.K[k]))
        .end_row();
  return done(w);
}

WrittenFile write_samples(const std::filesystem::path& path,
                          const std::vector<PropagatorSample>& samples,
                          const std::vector<std::string>& family_ids,
                          const std::vector<std::vector<std::string>>& combinations) {
  std::vector<std::string> header = {"T",    "ReK_exact", "ImK_exact", "ReK2",    "ImK2",
                                     "ReKun", "ImKun",    "contour",   "caustic_flag"};
  for (const auto& id : family_ids) {
    header.push_back("ReK2_" + id);
    header.push_back("ImK2_" + id);
  }
  auto combo_name = [](const std::vector<std::string>& ids) {
    std::string s;
    for (const auto& id : ids) s += (s.empty() ? "" : "+") + id;
    return s;
  };
  for (const auto& c : combinations) {
    header.push_back("ReK2_" + combo_name(c));
    header.push_back("ImK2_" + combo_name(c));
  }
  for (int c = 1; c <= 3; ++c) {
    header.push_back("ReKun_C" + std::to_string(c));
    header.push_back("ImKun_C" + std::to_string(c));
  }
  header.insert(header.end(), {"pair", "contour_unresolved", "coalescence_limit"});
  CsvWriter w(path,
              "normalized propagators: exact, second-order sum over contributing roots (K2), "
              "uniform (Kun) for the active pair on the automatically selected contour; contour "
              "is the principal-branch label (0 = no pair active); per-family and combination "
              "K2 columns are nan where the family has no contributing root",
              header);
  for (const auto& s : samples) {
    w.num(s.T);
    if (s.K_exact)
      w.num(s.K_exact->real()).num(s.K_exact->imag());
    else
      w.num(std::nan("")).num(std::nan(""));
    w.num(s.K2_total.real()).num(s.K2_total.imag());
    if (s.K_uniform)
      w.num(s.K_uniform->real()).num(s.K_uniform->imag());
    else
      w.num(std::nan("")).num(std::nan(""));
    w.integer(s.contour_used).integer(s.caustic_flag ? 1 : 0);
    for (const auto& id : family_ids) {
      auto it = s.K2_by_family.find(id);
      if (it == s.K2_by_family.end())
        w.num(std::nan("")).num(std::nan(""));
      else
        w.num(it->second.real()).num(it->second.imag());
    }
    for (const auto& c : combinations) {
      cplx sum = 0.0;
      bool any = false;
      for (const auto& id : c)
        if (auto it = s.K2_by_family.find(id); it != s.K2_by_family.end()) {
          sum += it->second;
          any = true;
        }
      if (any)
        w.num(sum.real()).num(sum.imag());
      else
        w.num(std::nan("")).num(std::nan(""));
    }
    for (int c = 0; c < 3; ++c) {
      if (s.pair.empty())
        w.num(std::nan("")).num(std::nan(""));
      else
        w.num(s.K_uniform_all[c].real()).num(s.K_uniform_all[c].imag());
    }
    w.text(s.pair).integer(s.contour_unresolved ? 1 : 0).integer(s.coalescence_limit ? 1 : 0);
    w.end_row();
  }
  return done(w);
}

}  // namespace csprop::cli
