#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "auvlab/harness.hpp"
#include "auvlab/trainer.hpp"

namespace auvlab {

/// Parsed numeric CSV: a header row plus double-valued data rows.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column_index(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return static_cast<int>(i);
    }
    throw ConfigError("CSV column not found: " + name);
  }

  std::vector<double> column(const std::string& name) const {
    const int idx = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row[idx]);
    return out;
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV file: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV file: " + path);
  std::istringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    while (std::getline(fields, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != table.columns.size()) {
      throw ConfigError("ragged CSV row in " + path);
    }
    table.rows.push_back(row);
  }
  return table;
}

namespace svg {

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

inline std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

inline const std::vector<std::string>& palette() {
  static const std::vector<std::string> colors = {"#1f6fb2", "#d1495b",
                                                  "#3a8c5f", "#8c5fa8"};
  return colors;
}

/// Maps a data interval onto a pixel interval, with a small margin so
/// flat series do not collapse onto one line.
struct Scale {
  double lo = 0.0, hi = 1.0, pixel_lo = 0.0, pixel_hi = 1.0;

  static Scale fit(std::vector<double> values, double pixel_lo,
                   double pixel_hi) {
    Scale s;
    s.pixel_lo = pixel_lo;
    s.pixel_hi = pixel_hi;
    if (values.empty()) return s;
    s.lo = *std::min_element(values.begin(), values.end());
    s.hi = *std::max_element(values.begin(), values.end());
    const double span = s.hi - s.lo;
    const double pad = span > 0.0 ? 0.06 * span : std::max(1e-6, 0.1 * std::abs(s.hi));
    s.lo -= pad;
    s.hi += pad;
    return s;
  }

  double operator()(double x) const {
    return pixel_lo + (x - lo) / (hi - lo) * (pixel_hi - pixel_lo);
  }
};

inline void polyline(std::ostream& out, const std::vector<double>& xs,
                     const std::vector<double>& ys, const std::string& color,
                     double width, const std::string& dash = "") {
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
      << width << "\"";
  if (!dash.empty()) out << " stroke-dasharray=\"" << dash << "\"";
  out << " points=\"";
  for (size_t i = 0; i < xs.size(); ++i) {
    out << num(xs[i]) << "," << num(ys[i]) << " ";
  }
  out << "\"/>\n";
}

inline void text(std::ostream& out, double x, double y, const std::string& s,
                 int size, const std::string& anchor = "start",
                 const std::string& color = "#333333") {
  out << "<text x=\"" << num(x) << "\" y=\"" << num(y)
      << "\" font-family=\"sans-serif\" font-size=\"" << size
      << "\" text-anchor=\"" << anchor << "\" fill=\"" << color << "\">" << s
      << "</text>\n";
}

inline void circle(std::ostream& out, double x, double y, double r,
                   const std::string& color) {
  out << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << r
      << "\" fill=\"" << color << "\"/>\n";
}

/// One chart panel: a mean line with a shaded stddev band.
inline void line_panel(std::ostream& out, double x0, double y0, double w,
                       double h, const std::string& title,
                       const std::vector<double>& steps,
                       const std::vector<double>& mean,
                       const std::vector<double>& stddev,
                       const std::string& color) {
  const double left = x0 + 52, right = x0 + w - 12;
  const double top = y0 + 26, bottom = y0 + h - 30;
  std::vector<double> envelope;
  for (size_t i = 0; i < mean.size(); ++i) {
    envelope.push_back(mean[i] - stddev[i]);
    envelope.push_back(mean[i] + stddev[i]);
  }
  const Scale sx = Scale::fit(steps, left, right);
  const Scale sy = Scale::fit(envelope, bottom, top);

  out << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\""
      << num(right - left) << "\" height=\"" << num(bottom - top)
      << "\" fill=\"#fafafa\" stroke=\"#cccccc\"/>\n";
  text(out, x0 + w / 2, y0 + 16, title, 13, "middle", "#111111");

  for (int tick = 0; tick <= 3; ++tick) {
    const double vy = sy.lo + (sy.hi - sy.lo) * tick / 3.0;
    const double py = sy(vy);
    polyline(out, {left, right}, {py, py}, "#e0e0e0", 0.5);
    text(out, left - 4, py + 3, label(vy), 9, "end", "#666666");
    const double vx = sx.lo + (sx.hi - sx.lo) * tick / 3.0;
    const double px = sx(vx);
    text(out, px, bottom + 12, label(vx), 9, "middle", "#666666");
  }

  out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" points=\"";
  for (size_t i = 0; i < mean.size(); ++i) {
    out << num(sx(steps[i])) << "," << num(sy(mean[i] + stddev[i])) << " ";
  }
  for (size_t i = mean.size(); i-- > 0;) {
    out << num(sx(steps[i])) << "," << num(sy(mean[i] - stddev[i])) << " ";
  }
  out << "\"/>\n";

  std::vector<double> px, py;
  for (size_t i = 0; i < mean.size(); ++i) {
    px.push_back(sx(steps[i]));
    py.push_back(sy(mean[i]));
  }
  polyline(out, px, py, color, 1.6);
  for (size_t i = 0; i < px.size(); ++i) circle(out, px[i], py[i], 2.0, color);
}

}  // namespace svg

/// Renders the evaluation history as a 2 x 2 panel figure: return,
/// settled distance, tracking error, and lost rate against env steps.
inline std::string render_convergence_svg(const CsvTable& history) {
  const int width = 860, height = 560;
  const double pw = width / 2.0, ph = height / 2.0;
  const std::vector<double> steps = history.column("env_steps");
  struct Panel {
    const char* title;
    const char* mean_col;
    const char* std_col;
  };
  const Panel panels[4] = {
      {"Evaluation return", "eval_return_mean", "eval_return_std"},
      {"Settled distance", "tail_distance_mean", "tail_distance_std"},
      {"Tracking error", "tracking_error_mean", "tracking_error_std"},
      {"Lost rate", "lost_rate_mean", "lost_rate_std"}};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int p = 0; p < 4; ++p) {
    svg::line_panel(out, (p % 2) * pw, (p / 2) * ph, pw, ph, panels[p].title,
                    steps, history.column(panels[p].mean_col),
                    history.column(panels[p].std_col), svg::palette()[p]);
  }
  out << "</svg>\n";
  return out.str();
}

/// Axonometric projection of the workspace used by the trajectory view.
inline std::pair<double, double> project_iso(const Eigen::Vector3d& p) {
  const double c = std::cos(M_PI / 6.0), s = std::sin(M_PI / 6.0);
  return {(p.x() - p.y()) * c, (p.x() + p.y()) * s - p.z()};
}

/// Number of steps between the temporal markers on trajectory exports
/// and plots.
constexpr int kTrajectoryStride = 60;

/// Renders one evaluation episode in 3D: workspace cube, target path in
/// black, one color per agent, dots every kTrajectoryStride steps.
inline std::string render_trajectory_svg(const EvalEpisode& episode,
                                         double workspace_half) {
  const int width = 760, height = 640;
  std::vector<double> us, vs;
  const auto collect = [&](const Eigen::Vector3d& p) {
    const auto [u, v] = project_iso(p);
    us.push_back(u);
    vs.push_back(v);
  };
  const double hw = workspace_half;
  std::vector<Eigen::Vector3d> corners;
  for (int cx : {-1, 1}) {
    for (int cy : {-1, 1}) {
      for (int cz : {-1, 1}) corners.emplace_back(cx * hw, cy * hw, cz * hw);
    }
  }
  for (const auto& c : corners) collect(c);
  for (const auto& p : episode.target_path) collect(p);
  for (const auto& path : episode.agent_paths) {
    for (const auto& p : path) collect(p);
  }
  svg::Scale sx = svg::Scale::fit(us, 40, width - 40);
  svg::Scale sy = svg::Scale::fit(vs, height - 60, 40);
  const auto at = [&](const Eigen::Vector3d& p) {
    const auto [u, v] = project_iso(p);
    return std::pair<double, double>{sx(u), sy(v)};
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const int cube_edges[12][2] = {{0, 1}, {0, 2}, {0, 4}, {1, 3},
                                 {1, 5}, {2, 3}, {2, 6}, {3, 7},
                                 {4, 5}, {4, 6}, {5, 7}, {6, 7}};
  for (const auto& edge : cube_edges) {
    const auto [ax, ay] = at(corners[edge[0]]);
    const auto [bx, by] = at(corners[edge[1]]);
    svg::polyline(out, {ax, bx}, {ay, by}, "#bbbbbb", 0.8, "4,4");
  }

  const auto draw_path = [&](const std::vector<Eigen::Vector3d>& path,
                             const std::string& color, double width_px) {
    std::vector<double> px, py;
    for (const auto& p : path) {
      const auto [x, y] = at(p);
      px.push_back(x);
      py.push_back(y);
    }
    svg::polyline(out, px, py, color, width_px);
    for (size_t t = 0; t < path.size(); t += kTrajectoryStride) {
      const auto [x, y] = at(path[t]);
      svg::circle(out, x, y, 2.6, color);
    }
    if (!path.empty()) {
      const auto [x, y] = at(path.front());
      svg::circle(out, x, y, 4.2, color);
    }
  };

  draw_path(episode.target_path, "#111111", 1.8);
  for (size_t i = 0; i < episode.agent_paths.size(); ++i) {
    draw_path(episode.agent_paths[i],
              svg::palette()[i % svg::palette().size()], 1.3);
  }

  svg::text(out, 40, 24, "Swarm and target trajectories", 14, "start",
            "#111111");
  svg::text(out, 40, height - 18,
            "large dot: start, small dots: every " +
                std::to_string(kTrajectoryStride) + " steps, black: target",
            11, "start", "#555555");
  double legend_x = width - 200;
  for (size_t i = 0; i < episode.agent_paths.size(); ++i) {
    const double y = 24 + 16 * static_cast<double>(i);
    svg::circle(out, legend_x, y - 4, 4, svg::palette()[i % 4]);
    svg::text(out, legend_x + 10, y, "vehicle " + std::to_string(i), 11);
  }
  out << "</svg>\n";
  return out.str();
}

/// Dumps the positions of one captured episode; `stride` picks every
/// k-th step (1 keeps all of them).
inline void write_trajectory_csv(const EvalEpisode& episode,
                                 const std::string& path, int stride) {
  std::ofstream out(path);
  const int n = static_cast<int>(episode.agent_paths.size());
  std::vector<std::string> columns = {"t", "target_x", "target_y", "target_z"};
  for (int i = 0; i < n; ++i) {
    const std::string base = "vehicle" + std::to_string(i) + "_";
    columns.push_back(base + "x");
    columns.push_back(base + "y");
    columns.push_back(base + "z");
  }
  detail::write_csv_header(out, columns);
  for (size_t t = 0; t < episode.target_path.size(); t += stride) {
    out << t << ",";
    std::vector<double> row = {episode.target_path[t].x(),
                               episode.target_path[t].y(),
                               episode.target_path[t].z()};
    for (int i = 0; i < n; ++i) {
      row.push_back(episode.agent_paths[i][t].x());
      row.push_back(episode.agent_paths[i][t].y());
      row.push_back(episode.agent_paths[i][t].z());
    }
    detail::write_csv_values(out, row);
  }
}

/// The plot subcommand body: replays one evaluation episode from the
/// run's checkpoint, dumps the trajectory tables, and renders both SVG
/// figures into `out_dir`.
inline void plot_run(const std::string& run_dir, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const LoadedRun run = load_run(run_dir);
  const auto episodes =
      run_eval_episodes(run.cfg, run.policy.actor,
                        static_cast<std::uint64_t>(run.seed), 1, true);
  write_trajectory_csv(episodes[0],
                       (fs::path(out_dir) / "trajectory.csv").string(), 1);
  write_trajectory_csv(
      episodes[0], (fs::path(out_dir) / "trajectory_sampled.csv").string(),
      kTrajectoryStride);

  const CsvTable history =
      read_csv((fs::path(run_dir) / "history.csv").string());
  std::ofstream conv(fs::path(out_dir) / "convergence.svg");
  conv << render_convergence_svg(history);
  std::ofstream traj(fs::path(out_dir) / "trajectory.svg");
  traj << render_trajectory_svg(episodes[0],
                                run.cfg.env.episode.workspace_half);
}

}  // namespace auvlab
