#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "envelope.hpp"
#include "errors.hpp"
#include "exactdiag.hpp"
#include "grid.hpp"
#include "region.hpp"

namespace fermispec {

using json = nlohmann::ordered_json;

// Shortest decimal that round-trips; the determinism contract hangs on this.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw config_error("cannot parse '" + std::string(s) + "' as a number");
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline void write_csv(const std::filesystem::path& path, const CsvTable& t) {
  std::ofstream f(path, std::ios::binary);  // binary: LF endings everywhere
  if (!f) throw config_error("cannot open " + path.string() + " for writing");
  for (std::size_t c = 0; c < t.header.size(); ++c) f << (c ? "," : "") << t.header[c];
  f << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) f << (c ? "," : "") << row[c];
    f << '\n';
  }
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      cells.push_back(line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

// Envelope tables: integer lattice coordinates, physical momenta as exact decimals
// of index*spacing, then the value column.
inline CsvTable envelope_table(const MomentumGrid& grid, const std::vector<double>& values,
                               const std::string& value_name) {
  if (values.size() != grid.size()) throw std::invalid_argument("envelope_table: size mismatch");
  CsvTable t;
  for (int a = 0; a < grid.d; ++a) t.header.push_back("n" + std::to_string(a + 1));
  for (int a = 0; a < grid.d; ++a) t.header.push_back("k" + std::to_string(a + 1));
  t.header.push_back(value_name);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<std::string> row;
    const Coord c = grid.point(i);
    for (int a = 0; a < grid.d; ++a) row.push_back(std::to_string(c[a]));
    for (int a = 0; a < grid.d; ++a) row.push_back(format_double(c[a] * grid.spacing));
    row.push_back(format_double(values[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_envelope_csv(const std::filesystem::path& path, const SpectrumEnvelope& env) {
  write_csv(path, envelope_table(env.grid, env.values, env.sector_tag));
}

struct EnvelopeFile {
  int d = 0;
  std::vector<Coord> coords;
  std::vector<std::array<double, 3>> momenta;
  std::vector<double> values;
  std::string value_name;
};

inline EnvelopeFile read_envelope_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  EnvelopeFile e;
  int d = 0;
  while (d < 3 && static_cast<std::size_t>(2 * d) < t.header.size() &&
         t.header[static_cast<std::size_t>(d)] == "n" + std::to_string(d + 1))
    ++d;
  if (d == 0 || t.header.size() != static_cast<std::size_t>(2 * d + 1))
    throw config_error(path.string() + ": not an envelope table");
  e.d = d;
  e.value_name = t.header.back();
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw config_error(path.string() + ": ragged row");
    Coord c{0, 0, 0};
    std::array<double, 3> m{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) {
      c[a] = static_cast<int>(std::stol(row[static_cast<std::size_t>(a)]));
      m[a] = parse_double(row[static_cast<std::size_t>(d + a)]);
    }
    e.coords.push_back(c);
    e.momenta.push_back(m);
    e.values.push_back(parse_double(row.back()));
  }
  return e;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot open " + path.string() + " for writing");
  f << j.dump(2) << '\n';
}

inline json coord_json(const Coord& c, int d) {
  json a = json::array();
  for (int i = 0; i < d; ++i) a.push_back(c[i]);
  return a;
}

inline json blocks_json(const std::vector<SectorBlock>& blocks, int d) {
  json out = json::array();
  for (const auto& b : blocks) {
    json jb;
    jb["K"] = coord_json(b.total_momentum, d);
    jb["N"] = b.particle_number;
    jb["parity"] = b.parity;
    jb["dim"] = b.basis_states.size();
    jb["eigenvalues"] = b.eigenvalues;
    out.push_back(std::move(jb));
  }
  return out;
}

// Minimal SVG 1.1 emitter: the figures are rect runs plus polylines, nothing else.
class SvgWriter {
 public:
  SvgWriter(double x0, double y0, double w, double h, int px_w, int px_h)
      : x0_(x0), y0_(y0), w_(w), h_(h) {
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << px_w
         << "\" height=\"" << px_h << "\" viewBox=\"" << fmt(x0) << " " << fmt(y0) << " "
         << fmt(w) << " " << fmt(h) << "\">\n";
  }

  // y axis grows upward in physics; flip here so callers pass plain (k, e)
  double flip(double y) const { return y0_ + h_ - (y - y0_); }

  void rect(double x, double y, double w, double h, const std::string& fill) {
    out_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(flip(y + h)) << "\" width=\"" << fmt(w)
         << "\" height=\"" << fmt(h) << "\" fill=\"" << fill << "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                double width, bool dotted) {
    if (pts.size() < 2) return;
    out_ << "<polyline points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      out_ << (i ? " " : "") << fmt(pts[i].first) << "," << fmt(flip(pts[i].second));
    out_ << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << fmt(width) << "\"";
    if (dotted) out_ << " stroke-dasharray=\"" << fmt(width * 2) << "," << fmt(width * 2) << "\"";
    out_ << "/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width) {
    out_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(flip(y1)) << "\" x2=\"" << fmt(x2)
         << "\" y2=\"" << fmt(flip(y2)) << "\" stroke=\"" << stroke << "\" stroke-width=\""
         << fmt(width) << "\"/>\n";
  }

  void text(double x, double y, const std::string& s, double size) {
    out_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(flip(y)) << "\" font-size=\"" << fmt(size)
         << "\" font-family=\"sans-serif\">" << s << "</text>\n";
  }

  void save(const std::filesystem::path& path) {
    out_ << "</svg>\n";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw config_error("cannot open " + path.string() + " for writing");
    f << out_.str();
  }

 private:
  static std::string fmt(double v) { return format_double(v); }
  double x0_, y0_, w_, h_;
  std::ostringstream out_;
};

}  // namespace fermispec
