#include "rppg/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "rppg/error.hpp"

namespace rppg {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::string& path, const char* who) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(std::string(who) + ": cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

LandmarkFrame LandmarkFrame::make(int frame_index, std::vector<std::array<double, 2>> points) {
  if (points.size() != kLandmarkCount)
    throw FormatError("landmarks: frame " + std::to_string(frame_index) + " has " +
                      std::to_string(points.size()) + " points, expected " +
                      std::to_string(kLandmarkCount));
  for (const auto& p : points) {
    if (!(p[0] >= 0.0 && p[0] <= 1.0 && p[1] >= 0.0 && p[1] <= 1.0))
      throw FormatError("landmarks: frame " + std::to_string(frame_index) +
                        " has a coordinate outside [0,1]");
  }
  return LandmarkFrame{frame_index, std::move(points)};
}

RoiDefinition RoiDefinition::make(RoiId roi, std::vector<int> polygon, std::vector<int> subtract) {
  if (polygon.size() < 3) throw FormatError("roi definition: polygon needs at least 3 indices");
  auto check = [](const std::vector<int>& idx) {
    for (int i : idx)
      if (i < 0 || i >= static_cast<int>(kLandmarkCount))
        throw FormatError("roi definition: landmark index " + std::to_string(i) + " out of range");
  };
  check(polygon);
  check(subtract);
  if (!subtract.empty() && subtract.size() < 3)
    throw FormatError("roi definition: subtract loop needs at least 3 indices");
  return RoiDefinition{roi, std::move(polygon), std::move(subtract)};
}

std::array<RoiDefinition, 3> default_roi_definitions() {
  // Face-mesh rings: hairline + brow arc for the forehead, an under-eye to
  // mouth-corner band for cheeks+nose, and the face oval minus the outer lips.
  std::vector<int> forehead{21,  54,  103, 67,  109, 10,  338, 297, 332, 284, 300,
                            293, 334, 296, 336, 9,   107, 66,  105, 63,  70};
  std::vector<int> cheeknose{93, 119, 6, 348, 323, 291, 164, 61};
  std::vector<int> face_oval{10,  338, 297, 332, 284, 251, 389, 356, 454, 323, 361, 288,
                             397, 365, 379, 378, 400, 377, 152, 148, 176, 149, 150, 136,
                             172, 58,  132, 93,  234, 127, 162, 21,  54,  103, 67,  109};
  std::vector<int> lips{61,  146, 91,  181, 84, 17, 314, 405, 321, 375,
                        291, 409, 270, 269, 267, 0,  37,  39,  40,  185};
  return {RoiDefinition::make(RoiId::Forehead, std::move(forehead)),
          RoiDefinition::make(RoiId::CheekNose, std::move(cheeknose)),
          RoiDefinition::make(RoiId::FaceNoMouth, std::move(face_oval), std::move(lips))};
}

std::array<RoiDefinition, 3> load_roi_definitions(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path, "roi definitions"));
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(std::string("roi definitions: invalid JSON: ") + e.what());
  }
  if (!j.is_array()) throw FormatError("roi definitions: expected a JSON array");

  std::array<bool, 3> seen{false, false, false};
  std::array<RoiDefinition, 3> defs = default_roi_definitions();
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("roi") || !item.contains("polygon"))
      throw FormatError("roi definitions: each entry needs 'roi' and 'polygon'");
    const auto roi = roi_from_name(item.at("roi").get<std::string>());
    if (!roi) throw FormatError("roi definitions: unknown roi '" +
                                item.at("roi").get<std::string>() + "'");
    std::vector<int> polygon = item.at("polygon").get<std::vector<int>>();
    std::vector<int> subtract;
    if (item.contains("subtract")) subtract = item.at("subtract").get<std::vector<int>>();
    defs[static_cast<std::size_t>(*roi)] = RoiDefinition::make(*roi, std::move(polygon),
                                                               std::move(subtract));
    seen[static_cast<std::size_t>(*roi)] = true;
  }
  for (std::size_t i = 0; i < 3; ++i)
    if (!seen[i])
      throw FormatError(std::string("roi definitions: missing entry for '") +
                        roi_name(static_cast<RoiId>(i)) + "'");
  return defs;
}

void save_roi_definitions(const std::array<RoiDefinition, 3>& defs, const std::string& path) {
  ordered_json j = ordered_json::array();
  for (const auto& def : defs) {
    ordered_json item;
    item["roi"] = roi_name(def.roi);
    item["polygon"] = def.polygon;
    if (!def.subtract.empty()) item["subtract"] = def.subtract;
    j.push_back(std::move(item));
  }
  std::ofstream out(path);
  if (!out) throw FormatError("roi definitions: cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

std::vector<LandmarkFrame> load_landmarks(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path, "load_landmarks"));
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(std::string("load_landmarks: invalid JSON: ") + e.what());
  }
  if (!j.is_array()) throw FormatError("load_landmarks: expected a JSON array of frames");

  std::vector<LandmarkFrame> frames;
  frames.reserve(j.size());
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("frame") || !item.contains("points"))
      throw FormatError("load_landmarks: each entry needs 'frame' and 'points'");
    const int idx = item.at("frame").get<int>();
    std::vector<std::array<double, 2>> pts;
    try {
      pts = item.at("points").get<std::vector<std::array<double, 2>>>();
    } catch (const std::exception&) {
      throw FormatError("load_landmarks: frame " + std::to_string(idx) +
                        " points must be [x,y] pairs");
    }
    frames.push_back(LandmarkFrame::make(idx, std::move(pts)));
  }
  std::sort(frames.begin(), frames.end(),
            [](const LandmarkFrame& a, const LandmarkFrame& b) { return a.frame_index < b.frame_index; });
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].frame_index != static_cast<int>(i))
      throw FormatError("load_landmarks: non-contiguous frames (expected " + std::to_string(i) +
                        ", got " + std::to_string(frames[i].frame_index) + ")");
  }
  return frames;
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

namespace {

// Even-odd scanline fill against pixel centers.
void fill_polygon(const std::vector<std::array<double, 2>>& pts, int width, int height,
                  std::vector<std::uint8_t>& out, std::uint8_t value) {
  const std::size_t n = pts.size();
  std::vector<double> xs;
  for (int y = 0; y < height; ++y) {
    const double yc = y + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = pts[i];
      const auto& b = pts[(i + 1) % n];
      if ((a[1] <= yc && b[1] > yc) || (b[1] <= yc && a[1] > yc)) {
        const double t = (yc - a[1]) / (b[1] - a[1]);
        xs.push_back(a[0] + t * (b[0] - a[0]));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
      const int lo = std::max(0, static_cast<int>(std::ceil(xs[i] - 0.5)));
      const int hi = std::min(width - 1, static_cast<int>(std::floor(xs[i + 1] - 0.5)));
      for (int x = lo; x <= hi; ++x) {
        const double xc = x + 0.5;
        if (xc >= xs[i] && xc < xs[i + 1])
          out[static_cast<std::size_t>(y) * width + x] = value;
      }
    }
  }
}

std::vector<std::array<double, 2>> polygon_pixels(const LandmarkFrame& landmarks,
                                                  const std::vector<int>& indices, int width,
                                                  int height) {
  std::vector<std::array<double, 2>> pts;
  pts.reserve(indices.size());
  for (int i : indices) {
    const auto& p = landmarks.points[static_cast<std::size_t>(i)];
    pts.push_back({p[0] * width, p[1] * height});
  }
  return pts;
}

}  // namespace

Mask roi_mask(const LandmarkFrame& landmarks, const RoiDefinition& def, int width, int height) {
  if (width <= 0 || height <= 0) throw FormatError("roi_mask: non-positive dimensions");
  Mask mask;
  mask.width = width;
  mask.height = height;
  mask.bits.assign(static_cast<std::size_t>(width) * height, 0);
  fill_polygon(polygon_pixels(landmarks, def.polygon, width, height), width, height, mask.bits, 1);
  if (!def.subtract.empty())
    fill_polygon(polygon_pixels(landmarks, def.subtract, width, height), width, height, mask.bits, 0);
  if (mask.count() == 0)
    throw FormatError(std::string("roi_mask: degenerate polygon for '") + roi_name(def.roi) + "'");
  return mask;
}

ChannelMeans extract_roi_means(const Image& frame, const Mask& mask) {
  if (frame.width != mask.width || frame.height != mask.height)
    throw FormatError("extract_roi_means: mask/image dimension mismatch");

  const int h = frame.height;
  std::vector<double> row_r(h, 0.0), row_g(h, 0.0), row_b(h, 0.0);
  std::vector<std::size_t> row_n(h, 0);

  // Per-row partial sums, reduced in row order so totals do not depend on the
  // thread count.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int y = 0; y < h; ++y) {
    double sr = 0.0, sg = 0.0, sb = 0.0;
    std::size_t cnt = 0;
    const std::uint8_t* px = frame.at(0, y);
    const std::uint8_t* mb = mask.bits.data() + static_cast<std::size_t>(y) * mask.width;
    for (int x = 0; x < frame.width; ++x, px += 3) {
      if (mb[x]) {
        sr += px[0];
        sg += px[1];
        sb += px[2];
        ++cnt;
      }
    }
    row_r[y] = sr;
    row_g[y] = sg;
    row_b[y] = sb;
    row_n[y] = cnt;
  }

  double sr = 0.0, sg = 0.0, sb = 0.0;
  std::size_t total = 0;
  for (int y = 0; y < h; ++y) {
    sr += row_r[y];
    sg += row_g[y];
    sb += row_b[y];
    total += row_n[y];
  }
  if (total == 0) throw FormatError("extract_roi_means: empty mask");
  const double inv = 1.0 / static_cast<double>(total);
  return ChannelMeans{sr * inv, sg * inv, sb * inv};
}

std::map<RoiId, RoiTrace> extract_traces(const std::vector<Image>& frames,
                                         const std::vector<LandmarkFrame>& landmarks,
                                         const std::array<RoiDefinition, 3>& defs, double fps) {
  if (frames.size() != landmarks.size())
    throw FormatError("extract_traces: frame count (" + std::to_string(frames.size()) +
                      ") != landmark count (" + std::to_string(landmarks.size()) + ")");
  if (frames.size() < 2) throw FormatError("extract_traces: need at least 2 frames");

  const std::size_t n = frames.size();
  std::array<std::vector<double>, 3> ch_r, ch_g, ch_b;
  for (auto& v : ch_r) v.resize(n);
  for (auto& v : ch_g) v.resize(n);
  for (auto& v : ch_b) v.resize(n);

  std::vector<std::string> errors(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    try {
      for (std::size_t k = 0; k < 3; ++k) {
        const Mask mask = roi_mask(landmarks[i], defs[k], frames[i].width, frames[i].height);
        const ChannelMeans m = extract_roi_means(frames[i], mask);
        ch_r[k][i] = m.r;
        ch_g[k][i] = m.g;
        ch_b[k][i] = m.b;
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!errors[i].empty())
      throw FormatError("extract_traces: frame " + std::to_string(i) + ": " + errors[i]);

  std::map<RoiId, RoiTrace> out;
  for (std::size_t k = 0; k < 3; ++k) {
    const RoiId roi = static_cast<RoiId>(k);
    out.emplace(roi, RoiTrace::make(roi, fps, std::move(ch_r[k]), std::move(ch_g[k]),
                                    std::move(ch_b[k])));
  }
  return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("load_trace: malformed " + what + " '" + s + "'");
  }
}

}  // namespace

TraceFile load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("load_trace: cannot open '" + path + "'");

  TraceFile file;
  bool have_fps = false;
  bool have_header = false;
  struct Row {
    long frame;
    double r, g, b;
  };
  std::array<std::vector<Row>, 3> rows;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string meta = line.substr(1);
      const auto eq = meta.find('=');
      if (eq == std::string::npos) continue;
      std::string key = meta.substr(0, eq);
      key.erase(std::remove(key.begin(), key.end(), ' '), key.end());
      const std::string value = meta.substr(eq + 1);
      if (key == "fps") {
        file.fps = parse_double(value, "fps");
        have_fps = true;
      } else if (key == "quality") {
        const auto v = verdict_from_name(value);
        if (!v) throw FormatError("load_trace: unknown quality '" + value + "'");
        file.quality = *v;
      }
      continue;
    }
    if (!have_header) {
      if (line != "frame,roi,mean_r,mean_g,mean_b")
        throw FormatError("load_trace: unexpected header '" + line + "'");
      have_header = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 5)
      throw FormatError("load_trace: line " + std::to_string(lineno) + " has " +
                        std::to_string(fields.size()) + " fields, expected 5");
    const auto roi = roi_from_name(fields[1]);
    if (!roi) throw FormatError("load_trace: unknown roi '" + fields[1] + "' on line " +
                                std::to_string(lineno));
    Row row;
    row.frame = static_cast<long>(parse_double(fields[0], "frame index"));
    row.r = parse_double(fields[2], "mean_r");
    row.g = parse_double(fields[3], "mean_g");
    row.b = parse_double(fields[4], "mean_b");
    for (double v : {row.r, row.g, row.b})
      if (!(v >= 0.0 && v <= 255.0))
        throw FormatError("load_trace: channel value out of range on line " +
                          std::to_string(lineno));
    rows[static_cast<std::size_t>(*roi)].push_back(row);
  }
  if (!have_header) throw FormatError("load_trace: missing header in '" + path + "'");
  if (!have_fps) throw FormatError("load_trace: missing '# fps=' metadata in '" + path + "'");
  if (!(file.fps > 0.0)) throw FormatError("load_trace: fps must be > 0");

  for (std::size_t k = 0; k < 3; ++k) {
    auto& rs = rows[k];
    if (rs.empty()) continue;
    std::sort(rs.begin(), rs.end(), [](const Row& a, const Row& b) { return a.frame < b.frame; });
    for (std::size_t i = 1; i < rs.size(); ++i)
      if (rs[i].frame == rs[i - 1].frame)
        throw FormatError("load_trace: duplicate frame " + std::to_string(rs[i].frame) +
                          " for roi '" + roi_name(static_cast<RoiId>(k)) + "'");
    if (rs.size() < 2)
      throw FormatError(std::string("load_trace: trace too short for roi '") +
                        roi_name(static_cast<RoiId>(k)) + "'");
    std::vector<double> r(rs.size()), g(rs.size()), b(rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i) {
      r[i] = rs[i].r;
      g[i] = rs[i].g;
      b[i] = rs[i].b;
    }
    const RoiId roi = static_cast<RoiId>(k);
    file.traces.emplace(roi, RoiTrace::make(roi, file.fps, std::move(r), std::move(g),
                                            std::move(b)));
  }
  if (file.traces.empty()) throw FormatError("load_trace: no data rows in '" + path + "'");
  return file;
}

void write_trace(const TraceFile& file, const std::string& path) {
  if (file.traces.empty()) throw FormatError("write_trace: empty trace set");
  if (!(file.fps > 0.0)) throw FormatError("write_trace: fps must be > 0");
  std::size_t n = 0;
  for (const auto& [roi, trace] : file.traces) {
    if (trace.fps != file.fps) throw FormatError("write_trace: trace fps mismatch");
    n = std::max(n, trace.size());
  }

  std::ofstream out(path);
  if (!out) throw FormatError("write_trace: cannot write '" + path + "'");
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.17g", file.fps);
  out << "# fps=" << buf << "\n";
  if (file.quality != QualityVerdict::Good) out << "# quality=" << verdict_name(file.quality) << "\n";
  out << "frame,roi,mean_r,mean_g,mean_b\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [roi, trace] : file.traces) {
      if (i >= trace.size()) continue;
      std::snprintf(buf, sizeof(buf), "%zu,%s,", i, roi_name(roi));
      out << buf;
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", trace.r[i], trace.g[i], trace.b[i]);
      out << buf << "\n";
    }
  }
  if (!out) throw FormatError("write_trace: write failed for '" + path + "'");
}

}  // namespace rppg
