#include "rbl/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "rbl/error.hpp"

namespace rbl {
namespace {

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    // stod rejects "nan" on some libcs; accept it explicitly.
    if (s == "nan" || s == "-nan") return std::nan("");
    throw Error(ErrorKind::kParse, "line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

int parse_int(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::kParse, "line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
}

}  // namespace

std::string to_csv(const RmseReport& report) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const ReportRow& r : report.rows) {
    out += std::string(to_string(r.estimator)) + ',' + std::string(to_string(r.block)) + ',' +
           fmt9(r.sigma) + ',' + fmt9(r.rmse) + ',' + std::to_string(r.trials) + ',' +
           std::to_string(r.failures) + ',' + fmt9(r.mean_iters) + ',' + fmt9(r.converged_frac) +
           '\n';
  }
  return out;
}

RmseReport parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw Error(ErrorKind::kParse, "line 1: expected header '" + std::string(kCsvHeader) + "'");
  }
  ++line_no;
  RmseReport report;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 8) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": expected 8 fields");
    }
    ReportRow r;
    try {
      r.estimator = parse_estimator(f[0]);
      r.block = parse_block(f[1]);
    } catch (const Error& e) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": " + e.what());
    }
    r.sigma = parse_double(f[2], line_no);
    r.rmse = parse_double(f[3], line_no);
    r.trials = parse_int(f[4], line_no);
    r.failures = parse_int(f[5], line_no);
    r.mean_iters = parse_double(f[6], line_no);
    r.converged_frac = parse_double(f[7], line_no);
    report.rows.push_back(r);
  }
  return report;
}

RmseReport read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_csv(buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string plot_script(const std::string& csv_name, const std::string& image_name) {
  std::string s;
  s += "#!/usr/bin/env python3\n";
  s += "# Generated by rbl. Draws RMSE vs range error from " + csv_name + ".\n";
  s += "import csv\n";
  s += "import os\n";
  s += "import matplotlib\n";
  s += "matplotlib.use(\"Agg\")\n";
  s += "import matplotlib.pyplot as plt\n\n";
  s += "HERE = os.path.dirname(os.path.abspath(__file__))\n";
  s += "CSV = os.path.join(HERE, \"" + csv_name + "\")\n";
  s += "OUT = os.path.join(HERE, \"" + image_name + "\")\n";
  s += "UNITS = {\"rotation\": \"deg\", \"translation\": \"m\", \"position\": \"m\"}\n\n";
  s += "series = {}\n";
  s += "with open(CSV, newline=\"\") as f:\n";
  s += "    for row in csv.DictReader(f):\n";
  s += "        key = (row[\"block\"], row[\"estimator\"])\n";
  s += "        series.setdefault(key, []).append((float(row[\"sigma\"]), float(row[\"rmse\"])))\n\n";
  s += "blocks = [b for b in (\"rotation\", \"translation\", \"position\")\n";
  s += "          if any(k[0] == b for k in series)]\n";
  s += "fig, axes = plt.subplots(1, len(blocks), figsize=(5 * len(blocks), 4), squeeze=False)\n";
  s += "for ax, block in zip(axes[0], blocks):\n";
  s += "    for (b, est), pts in sorted(series.items()):\n";
  s += "        if b != block:\n";
  s += "            continue\n";
  s += "        pts = sorted(p for p in pts if p[0] > 0 and p[1] > 0)\n";
  s += "        if pts:\n";
  s += "            ax.loglog([p[0] for p in pts], [p[1] for p in pts], marker=\"o\", label=est)\n";
  s += "    ax.set_title(block)\n";
  s += "    ax.set_xlabel(\"range error sigma [m]\")\n";
  s += "    ax.set_ylabel(\"RMSE [\" + UNITS[block] + \"]\")\n";
  s += "    ax.grid(True, which=\"both\", alpha=0.3)\n";
  s += "    ax.legend()\n";
  s += "fig.tight_layout()\n";
  s += "fig.savefig(OUT, dpi=150)\n";
  s += "print(OUT)\n";
  return s;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << text;
  out.close();
  if (!out) throw Error(ErrorKind::kIo, "failed writing '" + path.string() + "'");
}

EmittedFiles emit_report(const RmseReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create '" + out_dir.string() + "': " + ec.message());
  EmittedFiles files{out_dir / "rmse.csv", out_dir / "plot_rmse.py"};
  write_text_file(files.csv, to_csv(report));
  write_text_file(files.script, plot_script("rmse.csv", "rmse.png"));
  return files;
}

std::filesystem::path emit_plot_script(const std::filesystem::path& csv_path,
                                       const std::filesystem::path& out_dir) {
  read_csv(csv_path);  // validates the input
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create '" + out_dir.string() + "': " + ec.message());
  const std::filesystem::path script = out_dir / "plot_rmse.py";
  const std::filesystem::path rel =
      std::filesystem::relative(std::filesystem::absolute(csv_path), std::filesystem::absolute(out_dir));
  write_text_file(script, plot_script(rel.generic_string(), "rmse.png"));
  return script;
}

}  // namespace rbl
