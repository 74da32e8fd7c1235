#include "eqdisc/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "eqdisc/errors.hpp"

namespace eqdisc {

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

double parse_double(const std::string& field, const std::string& path, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw ConfigError(path + ":" + std::to_string(line) + ": cannot parse '" + field +
                      "' as a number");
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_dataset_csv(const std::string& path, const Dataset& data) {
  data.validate();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  std::string buf;
  buf.reserve(96);
  f << "t,x1,x2,x2dot,u\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    buf.clear();
    append_double(buf, data.t[i]);
    buf.push_back(',');
    append_double(buf, data.x1[i]);
    buf.push_back(',');
    append_double(buf, data.x2[i]);
    buf.push_back(',');
    append_double(buf, data.x2dot[i]);
    buf.push_back(',');
    append_double(buf, data.u[i]);
    buf.push_back('\n');
    f << buf;
  }
  if (!f) throw ConfigError("failed while writing '" + path + "'");
}

LoadedDataset load_dataset_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(f, line)) throw ConfigError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_csv(line);
  // slot per header column: 0..4 = t,x1,x2,x2dot,u
  std::vector<int> slot(header.size(), -1);
  LoadedDataset out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name == "t") { slot[c] = 0; out.has_t = true; }
    else if (name == "x1") { slot[c] = 1; out.has_x1 = true; }
    else if (name == "x2") { slot[c] = 2; out.has_x2 = true; }
    else if (name == "x2dot") { slot[c] = 3; out.has_x2dot = true; }
    else if (name == "u") { slot[c] = 4; out.has_u = true; }
    else throw ConfigError(path + ": unknown column '" + name +
                           "'; expected a subset of t,x1,x2,x2dot,u");
  }

  std::vector<std::vector<double>> cols(5);
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      cols[static_cast<std::size_t>(slot[c])].push_back(parse_double(fields[c], path, line_no));
    }
  }

  auto to_vec = [](const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
  };
  if (out.has_t) out.t = to_vec(cols[0]);
  if (out.has_x1) out.x1 = to_vec(cols[1]);
  if (out.has_x2) out.x2 = to_vec(cols[2]);
  if (out.has_x2dot) out.x2dot = to_vec(cols[3]);
  if (out.has_u) out.u = to_vec(cols[4]);

  out.rows = 0;
  for (const auto& c : cols) {
    if (!c.empty()) out.rows = static_cast<Eigen::Index>(c.size());
  }
  if (out.rows < 2) throw ConfigError(path + ": fewer than 2 data rows");

  if (out.has_t) {
    const double span = out.t[out.rows - 1] - out.t[0];
    if (!(span > 0.0)) throw ConfigError(path + ": time stamps not increasing");
    out.fs = static_cast<double>(out.rows - 1) / span;
  }
  return out;
}

Dataset complete_dataset(const LoadedDataset& loaded, bool reconstruct) {
  std::string missing;
  auto need = [&](bool present, const char* name) {
    if (!present) {
      if (!missing.empty()) missing += ", ";
      missing += name;
    }
  };
  need(loaded.has_t, "t");
  need(loaded.has_x1, "x1");
  need(loaded.has_u, "u");
  if (!missing.empty()) {
    throw ConfigError("dataset is missing required column(s): " + missing);
  }
  if (!reconstruct) {
    need(loaded.has_x2, "x2");
    need(loaded.has_x2dot, "x2dot");
    if (!missing.empty()) {
      throw ConfigError("dataset is missing column(s): " + missing +
                        " (pass --reconstruct to rebuild them from x1)");
    }
  }

  Dataset d;
  d.t = loaded.t;
  d.x1 = loaded.x1;
  d.u = loaded.u;
  d.fs = loaded.fs;
  d.x2 = loaded.has_x2 ? loaded.x2 : differentiate(loaded.x1, loaded.fs, 1);
  d.x2dot = loaded.has_x2dot ? loaded.x2dot : differentiate(loaded.x1, loaded.fs, 2);
  d.validate();
  return d;
}

}  // namespace eqdisc
