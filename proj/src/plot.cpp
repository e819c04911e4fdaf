#include "rppg/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>

#include "rppg/error.hpp"
#include "rppg/report.hpp"

namespace fs = std::filesystem;

namespace rppg {

namespace {

struct Range {
  double lo{std::numeric_limits<double>::max()};
  double hi{std::numeric_limits<double>::lowest()};

  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (lo > hi) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string render_svg(const std::vector<Panel>& panels, int width, int panel_height) {
  const int total_height = panel_height * static_cast<int>(panels.size());
  const double ml = 52, mr = 12, mt = 20, mb = 16;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << total_height << "\" viewBox=\"0 0 " << width << " " << total_height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& panel = panels[p];
    const double top = static_cast<double>(p) * panel_height;
    const double x0 = ml, x1 = width - mr;
    const double y0 = top + mt, y1 = top + panel_height - mb;

    Range rx, ry;
    for (const auto& s : panel.series) {
      for (double v : s.x) rx.include(v);
      for (double v : s.y) ry.include(v);
    }
    rx.pad();
    ry.pad();

    auto px = [&](double v) { return x0 + (v - rx.lo) / (rx.hi - rx.lo) * (x1 - x0); };
    auto py = [&](double v) { return y1 - (v - ry.lo) / (ry.hi - ry.lo) * (y1 - y0); };

    svg << "<text x=\"" << x0 << "\" y=\"" << top + 13
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << panel.title << "</text>\n";
    svg << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << x1 - x0 << "\" height=\""
        << y1 - y0 << "\" fill=\"none\" stroke=\"#888\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"2\" y=\"" << y0 + 4 << "\" font-family=\"sans-serif\" font-size=\"9\">"
        << fmt(ry.hi) << "</text>\n";
    svg << "<text x=\"2\" y=\"" << y1 << "\" font-family=\"sans-serif\" font-size=\"9\">"
        << fmt(ry.lo) << "</text>\n";
    svg << "<text x=\"" << x0 << "\" y=\"" << y1 + 12
        << "\" font-family=\"sans-serif\" font-size=\"9\">" << fmt(rx.lo) << "</text>\n";
    svg << "<text x=\"" << x1 - 30 << "\" y=\"" << y1 + 12
        << "\" font-family=\"sans-serif\" font-size=\"9\">" << fmt(rx.hi) << "</text>\n";

    for (const auto& s : panel.series) {
      if (s.markers) {
        for (std::size_t i = 0; i < s.x.size(); ++i)
          svg << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i]))
              << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
        continue;
      }
      svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i) svg << " ";
        svg << fmt(px(s.x[i])) << "," << fmt(py(s.y[i]));
      }
      svg << "\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<std::string> emit_plots(const AnalysisResult& analysis,
                                    const std::map<RoiId, RoiTrace>& traces,
                                    const PipelineConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<std::string> written;

  auto csv_path = [&](const std::string& stem, RoiId roi) {
    return (fs::path(out_dir) / (stem + "_" + roi_name(roi) + ".csv")).string();
  };

  for (const auto& [roi, processed] : analysis.rois) {
    const RoiTrace& trace = traces.at(roi);
    char buf[160];

    {  // raw RGB means
      std::ostringstream csv;
      csv << "t,mean_r,mean_g,mean_b\n";
      for (std::size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g\n",
                      static_cast<double>(i) / trace.fps, trace.r[i], trace.g[i], trace.b[i]);
        csv << buf;
      }
      const std::string path = csv_path("raw", roi);
      write_text_file(path, csv.str());
      written.push_back(path);
    }

    const std::vector<double> peaks = detect_peaks(processed.bvp, cfg.peak_min_distance_s);
    {  // processed signal + peak markers
      std::ostringstream csv;
      csv << "t,bvp,peak\n";
      std::size_t pi = 0;
      for (std::size_t i = 0; i < processed.bvp.size(); ++i) {
        const double t = static_cast<double>(i) / processed.bvp.fps;
        int is_peak = 0;
        if (pi < peaks.size() && std::abs(peaks[pi] - t) < 0.5 / processed.bvp.fps) {
          is_peak = 1;
          ++pi;
        }
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%d\n", t, processed.bvp.samples[i], is_peak);
        csv << buf;
      }
      const std::string path = csv_path("bvp", roi);
      write_text_file(path, csv.str());
      written.push_back(path);
    }

    const Psd& psd = analysis.psds.at(roi);
    {
      std::ostringstream csv;
      csv << "freq_hz,power\n";
      for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", psd.freqs[k], psd.power[k]);
        csv << buf;
      }
      const std::string path = csv_path("psd", roi);
      write_text_file(path, csv.str());
      written.push_back(path);
    }

    // One SVG per region: raw channels, processed signal with peaks, spectrum.
    std::vector<Panel> panels(3);
    panels[0].title = std::string(roi_name(roi)) + ": raw channel means";
    for (int c = 0; c < 3; ++c) {
      Series s;
      s.label = c == 0 ? "r" : (c == 1 ? "g" : "b");
      s.color = c == 0 ? "crimson" : (c == 1 ? "seagreen" : "royalblue");
      const auto& ch = c == 0 ? trace.r : (c == 1 ? trace.g : trace.b);
      for (std::size_t i = 0; i < ch.size(); ++i) {
        s.x.push_back(static_cast<double>(i) / trace.fps);
        s.y.push_back(ch[i]);
      }
      panels[0].series.push_back(std::move(s));
    }

    panels[1].title = std::string(roi_name(roi)) + ": processed signal and peaks";
    {
      Series line{"bvp", "black", {}, {}, false};
      for (std::size_t i = 0; i < processed.bvp.size(); ++i) {
        line.x.push_back(static_cast<double>(i) / processed.bvp.fps);
        line.y.push_back(processed.bvp.samples[i]);
      }
      Series dots{"peaks", "red", {}, {}, true};
      for (double t : peaks) {
        const auto idx = static_cast<std::size_t>(std::lround(t * processed.bvp.fps));
        dots.x.push_back(t);
        dots.y.push_back(processed.bvp.samples[std::min(idx, processed.bvp.size() - 1)]);
      }
      panels[1].series.push_back(std::move(line));
      panels[1].series.push_back(std::move(dots));
    }

    panels[2].title = std::string(roi_name(roi)) + ": power spectral density";
    {
      Series s{"psd", "purple", {}, {}, false};
      const double fmax = std::min(cfg.hr_band[1] + 1.0, psd.freqs.back());
      for (std::size_t k = 0; k < psd.freqs.size() && psd.freqs[k] <= fmax; ++k) {
        s.x.push_back(psd.freqs[k]);
        s.y.push_back(psd.power[k]);
      }
      panels[2].series.push_back(std::move(s));
    }

    const std::string svg_path = (fs::path(out_dir) / (std::string(roi_name(roi)) + ".svg")).string();
    write_text_file(svg_path, render_svg(panels));
    written.push_back(svg_path);
  }
  return written;
}

}  // namespace rppg
