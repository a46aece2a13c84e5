#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lqrpg/errors.hpp"

namespace lqrpg {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Fixed-width-free, locale-independent number formatting so CSV output is
// byte-identical across runs and platforms.
inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    out_.open(path);
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
    for (size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }

  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f6fb5";
};

// Minimal static SVG line chart; optional log10 axes; deterministic bytes.
inline void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                           const std::string& xlabel, const std::string& ylabel,
                           const std::vector<PlotSeries>& series, bool log_x = false,
                           bool log_y = false, const std::string& annotation = "") {
  const double width = 640, height = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  auto tx = [&](double v) { return log_x ? std::log10(std::max(v, 1e-300)) : v; };
  auto ty = [&](double v) { return log_y ? std::log10(std::max(v, 1e-300)) : v; };

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  if (xmin > xmax) { xmin = 0; xmax = 1; }
  if (ymin > ymax) { ymin = 0; ymax = 1; }
  if (xmax - xmin < 1e-12) xmax = xmin + 1;
  if (ymax - ymin < 1e-12) ymax = ymin + 1;

  auto px = [&](double v) { return ml + (tx(v) - xmin) / (xmax - xmin) * (width - ml - mr); };
  auto py = [&](double v) { return height - mb - (ty(v) - ymin) / (ymax - ymin) * (height - mt - mb); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << height - mb << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << (log_x ? " (log10)" : "")
      << "</text>\n";
  svg << "<text x=\"16\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << height / 2 << ")\">" << ylabel
      << (log_y ? " (log10)" : "") << "</text>\n";
  // axis extremes
  svg << "<text x=\"" << ml << "\" y=\"" << height - mb + 16
      << "\" font-size=\"10\" text-anchor=\"middle\">" << fmt_num(xmin) << "</text>\n";
  svg << "<text x=\"" << width - mr << "\" y=\"" << height - mb + 16
      << "\" font-size=\"10\" text-anchor=\"middle\">" << fmt_num(xmax) << "</text>\n";
  svg << "<text x=\"" << ml - 6 << "\" y=\"" << height - mb
      << "\" font-size=\"10\" text-anchor=\"end\">" << fmt_num(ymin) << "</text>\n";
  svg << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 4
      << "\" font-size=\"10\" text-anchor=\"end\">" << fmt_num(ymax) << "</text>\n";

  int legend_i = 0;
  for (const auto& s : series) {
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i)
      svg << fmt_num(px(s.x[i])) << "," << fmt_num(py(s.y[i])) << " ";
    svg << "\"/>\n";
    svg << "<text x=\"" << width - mr - 170 << "\" y=\"" << mt + 14 + 16 * legend_i
        << "\" font-size=\"11\" fill=\"" << s.color << "\">" << s.name << "</text>\n";
    ++legend_i;
  }
  if (!annotation.empty())
    svg << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 14 << "\" font-size=\"12\">" << annotation
        << "</text>\n";
  svg << "</svg>\n";

  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << svg.str();
}

inline int worker_count() {
  if (const char* env = std::getenv("LQRPG_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Index-based parallel map with a deterministic result layout: task i writes
// slot i regardless of scheduling.
template <class Fn>
void parallel_for(long n, Fn&& fn, int max_workers = worker_count()) {
  const int workers = static_cast<int>(std::max<long>(1, std::min<long>(max_workers, n)));
  if (workers == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<long> next{0};
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (long i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace lqrpg
