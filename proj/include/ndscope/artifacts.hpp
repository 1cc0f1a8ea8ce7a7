#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <unistd.h>

#include "ndscope/error.hpp"

namespace ndscope {

/// Writes through a temporary sibling and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

/// Shortest round-trip-safe decimal; "nan"/"inf" spelled out.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

/// Header row plus LF-terminated rows; cells are written verbatim.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw ShapeError("CSV row has " + std::to_string(row.size()) + " cells");
    rows_.push_back(std::move(row));
  }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct SvgSeries {
  std::string name;
  std::vector<double> x, y;
  bool markers = false;  // dots instead of a polyline
};

/// Minimal line/scatter chart with optional log axes.
class SvgPlot {
 public:
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;

  void add(SvgSeries s) { series_.push_back(std::move(s)); }

  std::string render(int width = 720, int height = 440) const {
    const double left = 80, right = 20 + 140, top = 40, bottom = 60;
    const double pw = width - left - right, ph = height - top - bottom;
    double x0 = inf(), x1 = -inf(), y0 = inf(), y1 = -inf();
    for (const auto& s : series_)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!usable(s.x[i], logx) || !usable(s.y[i], logy)) continue;
        x0 = std::min(x0, tx(s.x[i])), x1 = std::max(x1, tx(s.x[i]));
        y0 = std::min(y0, ty(s.y[i])), y1 = std::max(y1, ty(s.y[i]));
      }
    if (x0 > x1) x0 = 0, x1 = 1;
    if (y0 > y1) y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return top + ph - (ty(v) - y0) / (y1 - y0) * ph; };

    std::string o;
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o += text(width / 2.0, 22, title, "middle", 14);
    o += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    for (const auto& [v, label] : ticks(x0, x1, logx)) {
      const double x = left + (v - x0) / (x1 - x0) * pw;
      o += line(x, top + ph, x, top + ph + 5) + text(x, top + ph + 18, label, "middle", 11);
    }
    for (const auto& [v, label] : ticks(y0, y1, logy)) {
      const double y = top + ph - (v - y0) / (y1 - y0) * ph;
      o += line(left - 5, y, left, y) + text(left - 8, y + 4, label, "end", 11);
    }
    o += text(left + pw / 2, height - 18.0, xlabel, "middle", 12);
    o += "<text x=\"18\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         num(top + ph / 2) + ")\">" + escape(ylabel) + "</text>\n";
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    for (std::size_t k = 0; k < series_.size(); ++k) {
      const auto& s = series_[k];
      const std::string color = palette[k % 6];
      std::string pts;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!usable(s.x[i], logx) || !usable(s.y[i], logy)) continue;
        if (s.markers) {
          o += "<circle cx=\"" + num(px(s.x[i])) + "\" cy=\"" + num(py(s.y[i])) + "\" r=\"2\" fill=\"" + color +
               "\"/>\n";
        } else {
          pts += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
        }
      }
      if (!pts.empty()) {
        pts.pop_back();
        o += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1\" points=\"" + pts + "\"/>\n";
      }
      const double ly = top + 14 + 18.0 * static_cast<double>(k);
      o += line(left + pw + 12, ly - 4, left + pw + 32, ly - 4, color) + text(left + pw + 36, ly, s.name, "start", 11);
    }
    o += "</svg>\n";
    return o;
  }

 private:
  std::vector<SvgSeries> series_;

  static double inf() { return std::numeric_limits<double>::infinity(); }
  static bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0); }
  double tx(double v) const { return logx ? std::log10(v) : v; }
  double ty(double v) const { return logy ? std::log10(v) : v; }

  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }

  static std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
      if (c == '<') o += "&lt;";
      else if (c == '>') o += "&gt;";
      else if (c == '&') o += "&amp;";
      else o += c;
    }
    return o;
  }

  static std::string text(double x, double y, const std::string& s, const char* anchor, int size) {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\" font-size=\"" +
           std::to_string(size) + "\">" + escape(s) + "</text>\n";
  }

  static std::string line(double x0, double y0, double x1, double y1, const std::string& color = "black") {
    return "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(y1) +
           "\" stroke=\"" + color + "\"/>\n";
  }

  /// Tick positions in transformed coordinates with their labels.
  static std::vector<std::pair<double, std::string>> ticks(double lo, double hi, bool log) {
    std::vector<std::pair<double, std::string>> out;
    if (log) {
      const int a = static_cast<int>(std::ceil(lo - 1e-9)), b = static_cast<int>(std::floor(hi + 1e-9));
      const int stride = std::max(1, (b - a) / 8 + 1);
      for (int e = a; e <= b; e += stride) out.emplace_back(e, "1e" + std::to_string(e));
      return out;
    }
    const double raw = (hi - lo) / 6;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 * step ? 0.0 : v);
      out.emplace_back(v, buf);
    }
    return out;
  }
};

}  // namespace ndscope
