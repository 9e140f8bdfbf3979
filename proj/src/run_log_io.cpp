#include <cmath>
#include <cstdio>
#include <limits>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "specclip/harness.hpp"

namespace specclip {

const char* const kRunCsvHeader = "step,c,zeta_raw,zeta_hat,batch_size,loss,skipped,clamp_min,clamp_max";

namespace {

// %.17g round-trips any double exactly.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << contents;
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

void write_run_csv(const RunLog& log, const std::string& path) {
  std::ostringstream out;
  out << kRunCsvHeader << "\n";
  for (const StepRecord& r : log.steps) {
    out << r.step << ',' << fmt(r.c) << ',';
    if (r.zeta_raw) out << fmt(*r.zeta_raw);
    out << ',' << fmt(r.zeta_hat) << ',' << r.batch_size << ',';
    if (!r.skipped) out << fmt(r.loss);
    out << ',' << (r.skipped ? 1 : 0) << ',' << (r.clamp_min_hit ? 1 : 0) << ','
        << (r.clamp_max_hit ? 1 : 0) << "\n";
  }
  atomic_write(path, out.str());
}

std::vector<StepRecord> read_run_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line) || line != kRunCsvHeader) {
    throw FormatError(path + ": unexpected run-log header");
  }
  std::vector<StepRecord> steps;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 9) {
      throw FormatError(path + ": line " + std::to_string(line_no) + ": expected 9 columns");
    }
    StepRecord r;
    r.step = std::stoul(cells[0]);
    r.c = std::stod(cells[1]);
    if (!cells[2].empty()) r.zeta_raw = std::stod(cells[2]);
    r.zeta_hat = std::stod(cells[3]);
    r.batch_size = std::stoul(cells[4]);
    r.skipped = cells[6] == "1";
    r.loss = cells[5].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cells[5]);
    r.clamp_min_hit = cells[7] == "1";
    r.clamp_max_hit = cells[8] == "1";
    steps.push_back(r);
  }
  return steps;
}

void write_run_sidecar_json(const RunLog& log, const std::string& path) {
  nlohmann::json j;
  j["epsilon"] = log.epsilon;
  j["best_order"] = log.best_order;
  j["delta"] = log.delta;
  j["q"] = log.q;
  j["sigma"] = log.sigma;
  j["total_steps"] = log.total_steps;
  j["final_accuracy"] = log.final_accuracy;
  j["final_loss"] = log.final_loss;
  j["final_c"] = log.final_c;
  j["c_median"] = log.c_median();
  j["clamp_hits_min"] = log.clamp_hits_min;
  j["clamp_hits_max"] = log.clamp_hits_max;
  j["noise_draws"] = log.noise_draws;
  j["aborted"] = log.aborted;
  if (log.aborted) j["abort_reason"] = log.abort_reason;
  if (!log.diagnostics.empty()) j["diagnostics"] = log.diagnostics;
  j["timings"] = {{"train_s", log.timings.train_s},
                  {"probe_s", log.timings.probe_s},
                  {"eval_s", log.timings.eval_s}};
  atomic_write(path, j.dump(2) + "\n");
}

RunSidecar read_run_sidecar_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  RunSidecar s;
  s.epsilon = j.value("epsilon", 0.0);
  s.best_order = j.value("best_order", 0.0);
  s.final_accuracy = j.value("final_accuracy", 0.0);
  s.final_loss = j.value("final_loss", 0.0);
  s.final_c = j.value("final_c", 0.0);
  s.noise_draws = j.value("noise_draws", std::uint64_t{0});
  s.aborted = j.value("aborted", false);
  if (j.contains("timings")) {
    s.timings.train_s = j["timings"].value("train_s", 0.0);
    s.timings.probe_s = j["timings"].value("probe_s", 0.0);
    s.timings.eval_s = j["timings"].value("eval_s", 0.0);
  }
  return s;
}

}  // namespace specclip
