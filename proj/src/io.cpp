#include "vtract/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace vtract {

namespace {

[[noreturn]] void parse_error(const std::string& where, int line,
                              const std::string& what) {
  throw Error(ErrorKind::parse,
              where + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  return out;
}

void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::io, "write to '" + path + "' failed");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& s, const std::string& where, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    parse_error(where, line, "not a number: '" + s + "'");
  }
  if (used != s.size()) parse_error(where, line, "not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

// Data lines of a CSV with the expected header; comments start with '#'.
template <class Row>
void read_csv(std::istream& in, const std::string& header,
              const std::string& where, Row&& row) {
  std::string line;
  int n = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      row(line, std::vector<std::string>{}, n);
      continue;
    }
    if (!seen_header) {
      if (line != header) {
        parse_error(where, n, "expected header '" + header + "'");
      }
      seen_header = true;
      continue;
    }
    row(line, split_csv(line), n);
  }
  if (!seen_header) parse_error(where, n, "missing header '" + header + "'");
}

SpectralCurve read_two_or_three(std::istream& in, bool magnitude) {
  const std::string where = magnitude ? "magnitude" : "spectrum";
  std::vector<double> k;
  std::vector<cplx> v;
  read_csv(in, magnitude ? "k,abs" : "k,re,im", where,
           [&](const std::string&, const std::vector<std::string>& cells,
               int line) {
             if (cells.empty()) return;
             const std::size_t want = magnitude ? 2 : 3;
             if (cells.size() != want) {
               parse_error(where, line,
                           "expected " + std::to_string(want) + " columns");
             }
             const double kk = to_double(cells[0], where, line);
             if (!k.empty() && !(kk > k.back())) {
               parse_error(where, line, "k must be strictly increasing");
             }
             k.push_back(kk);
             if (magnitude) {
               const double a = to_double(cells[1], where, line);
               if (a < 0.0) parse_error(where, line, "negative modulus");
               v.emplace_back(a, 0.0);
             } else {
               v.emplace_back(to_double(cells[1], where, line),
                              to_double(cells[2], where, line));
             }
           });
  if (k.size() < 2) throw Error(ErrorKind::parse, where + ": fewer than 2 rows");
  SpectralCurve c;
  c.label = magnitude ? Quantity::P_lips_abs : Quantity::P_lips;
  c.k = Eigen::Map<Eigen::VectorXd>(k.data(), static_cast<Eigen::Index>(k.size()));
  c.values =
      Eigen::Map<Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
  return c;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RadiusProfile read_profile(std::istream& in) {
  const std::string where = "profile";
  std::string line;
  int n = 0;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++n;
      line = trim(line);
      if (!line.empty() && line[0] != '#') return true;
    }
    return false;
  };
  auto keyed = [&](const std::string& key) -> std::string {
    std::istringstream ls(line);
    std::string k, v, extra;
    ls >> k >> v;
    if (k != key || v.empty() || (ls >> extra)) {
      parse_error(where, n, "expected '" + key + " <value>'");
    }
    return v;
  };

  if (!next() || line != kProfileFormat) {
    parse_error(where, n, std::string("expected '") + kProfileFormat + "'");
  }
  if (!next()) parse_error(where, n, "missing 'ell'");
  const double ell = to_double(keyed("ell"), where, n);
  if (!next()) parse_error(where, n, "missing 'family'");
  const Family family = family_from_string(keyed("family"));
  if (!next()) parse_error(where, n, "missing 'r0'");
  ProfileParams params;
  params.r0 = to_double(keyed("r0"), where, n);

  bool have_line = next();
  if (have_line && line.rfind("r0p", 0) == 0) {
    params.r0_prime = to_double(keyed("r0p"), where, n);
    have_line = next();
  }
  if (family == Family::sampled) {
    if (!have_line) parse_error(where, n, "missing 'n'");
    const double count = to_double(keyed("n"), where, n);
    if (count < kMinSampledNodes || count != std::floor(count)) {
      parse_error(where, n,
                  "sample count must be an integer >= " +
                      std::to_string(kMinSampledNodes));
    }
    const auto m = static_cast<Eigen::Index>(count);
    params.x.resize(m);
    params.r.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!next()) parse_error(where, n, "fewer sample rows than 'n'");
      std::istringstream ls(line);
      std::string a, b, extra;
      ls >> a >> b;
      if (b.empty() || (ls >> extra)) parse_error(where, n, "expected 'x r'");
      params.x[i] = to_double(a, where, n);
      params.r[i] = to_double(b, where, n);
    }
    have_line = next();
  }
  if (have_line) parse_error(where, n, "unexpected trailing content");
  return make_profile(family, params, ell);
}

RadiusProfile read_profile_file(const std::string& path) {
  auto in = open_in(path);
  return read_profile(in);
}

void write_profile(std::ostream& out, const RadiusProfile& p) {
  out << kProfileFormat << "\n";
  out << "ell " << format_double(p.ell()) << "\n";
  out << "family " << to_string(p.family()) << "\n";
  out << "r0 " << format_double(p.r0_param()) << "\n";
  if (p.family() == Family::linear || p.family() == Family::quadratic) {
    out << "r0p " << format_double(p.r0p_param()) << "\n";
  }
  if (p.family() == Family::sampled) {
    const auto& x = p.sample_x();
    const auto& r = p.sample_r();
    out << "n " << x.size() << "\n";
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      out << format_double(x[i]) << " " << format_double(r[i]) << "\n";
    }
  }
}

void write_profile_file(const std::string& path, const RadiusProfile& p) {
  auto out = open_out(path);
  write_profile(out, p);
  finish_write(out, path);
}

SpectralCurve read_spectrum(std::istream& in) {
  return read_two_or_three(in, false);
}

SpectralCurve read_spectrum_file(const std::string& path) {
  auto in = open_in(path);
  return read_spectrum(in);
}

SpectralCurve read_magnitude(std::istream& in) {
  return read_two_or_three(in, true);
}

SpectralCurve read_magnitude_file(const std::string& path) {
  auto in = open_in(path);
  return read_magnitude(in);
}

void write_spectrum(std::ostream& out, const SpectralCurve& c) {
  out << "k,re,im\n";
  for (Eigen::Index i = 0; i < c.k.size(); ++i) {
    out << format_double(c.k[i]) << "," << format_double(c.values[i].real())
        << "," << format_double(c.values[i].imag()) << "\n";
  }
}

void write_magnitude(std::ostream& out, const SpectralCurve& c) {
  out << "k,abs\n";
  for (Eigen::Index i = 0; i < c.k.size(); ++i) {
    out << format_double(c.k[i]) << "," << format_double(std::abs(c.values[i]))
        << "\n";
  }
}

void write_curve_file(const std::string& path, const SpectralCurve& c,
                      bool magnitude) {
  auto out = open_out(path);
  if (magnitude) {
    write_magnitude(out, c);
  } else {
    write_spectrum(out, c);
  }
  finish_write(out, path);
}

ZeroCatalog read_zeros(std::istream& in) {
  const std::string where = "zeros";
  ZeroCatalog cat;
  bool fourth = false;
  read_csv(in, "re,im,mult", where,
           [&](const std::string& line, const std::vector<std::string>& cells,
               int n) {
             if (cells.empty()) {
               const std::string body = trim(line.substr(1));
               if (body == "quadrant-4") {
                 fourth = true;
               } else if (body.rfind("search_radius=", 0) == 0) {
                 cat.search_radius = to_double(
                     body.substr(std::string("search_radius=").size()), where, n);
               }
               return;
             }
             if (cells.size() != 3) parse_error(where, n, "expected 3 columns");
             const cplx k(to_double(cells[0], where, n),
                          to_double(cells[1], where, n));
             const double m = to_double(cells[2], where, n);
             if (m < 1 || m != std::floor(m)) {
               parse_error(where, n, "multiplicity must be a positive integer");
             }
             if (!(k.real() > 0.0) || k.imag() == 0.0) {
               parse_error(where, n, "zero must have Re k > 0 and Im k != 0");
             }
             if (fourth && k.imag() > 0.0) {
               parse_error(where, n, "first-quadrant zero after '# quadrant-4'");
             }
             const Zero z{k, static_cast<int>(m)};
             (k.imag() > 0.0 ? cat.first_quadrant : cat.fourth_quadrant)
                 .push_back(z);
           });
  auto by_modulus = [](const Zero& a, const Zero& b) {
    return std::abs(a.k) < std::abs(b.k);
  };
  std::sort(cat.first_quadrant.begin(), cat.first_quadrant.end(), by_modulus);
  std::sort(cat.fourth_quadrant.begin(), cat.fourth_quadrant.end(), by_modulus);
  return cat;
}

ZeroCatalog read_zeros_file(const std::string& path) {
  auto in = open_in(path);
  return read_zeros(in);
}

void write_zeros(std::ostream& out, const ZeroCatalog& cat) {
  out << "re,im,mult\n";
  out << "# search_radius=" << format_double(cat.search_radius) << "\n";
  for (const Zero& z : cat.first_quadrant) {
    out << format_double(z.k.real()) << "," << format_double(z.k.imag()) << ","
        << z.multiplicity << "\n";
  }
  out << "# quadrant-4\n";
  for (const Zero& z : cat.fourth_quadrant) {
    out << format_double(z.k.real()) << "," << format_double(z.k.imag()) << ","
        << z.multiplicity << "\n";
  }
}

void write_zeros_file(const std::string& path, const ZeroCatalog& cat) {
  auto out = open_out(path);
  write_zeros(out, cat);
  finish_write(out, path);
}

void write_density_report(std::ostream& out, const ZeroCatalog& cat,
                          double limit, const std::vector<int>& mirrored) {
  const auto rows = zero_density_table(cat);
  out << "rho,n_plus,window,ratio,limit";
  if (!mirrored.empty()) out << ",mirrored";
  out << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const DensityRow& r = rows[i];
    out << format_double(r.rho) << "," << r.n_plus << "," << r.window << ","
        << format_double(r.ratio) << "," << format_double(limit);
    if (i < mirrored.size()) out << "," << mirrored[i];
    out << "\n";
  }
}

void write_diagnostics_file(const std::string& path, const Diagnostics& diag) {
  auto out = open_out(path);
  out << diag.str();
  finish_write(out, path);
}

}  // namespace vtract
