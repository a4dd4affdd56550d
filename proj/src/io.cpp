#include "gprlpv/io.hpp"

#include "json_util.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

namespace gprlpv {

namespace detail {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write file: " + path);
  }
  out << text;
  if (!out) {
    throw ValidationError("write failed: " + path);
  }
}

std::pair<long, long> line_column_at(const std::string& text, std::size_t byte) {
  long line = 1;
  long column = 1;
  const std::size_t stop = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < stop; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column_at(text, e.byte);
    std::ostringstream msg;
    msg << origin << ": " << e.what();
    throw ParseError(msg.str(), line, column);
  }
}

json load_json_file(const std::string& path) {
  return parse_json_text(read_text_file(path), path);
}

void save_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

void require_version(const json& j, const std::string& expected_format,
                     const std::string& origin) {
  if (!j.is_object()) {
    throw ValidationError(origin + ": expected a top-level object");
  }
  if (!j.contains("format") || j.at("format").get<std::string>() != expected_format) {
    throw ValidationError(origin + ": expected format \"" + expected_format + "\"");
  }
  if (!j.contains("format_version") || !j.at("format_version").is_number_integer()) {
    throw ValidationError(origin + ": missing integer format_version");
  }
  const int version = j.at("format_version").get<int>();
  if (version != kFormatVersion) {
    std::ostringstream msg;
    msg << origin << ": unsupported format_version " << version << " (expected "
        << kFormatVersion << ")";
    throw ValidationError(msg.str());
  }
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(v(i));
  }
  return out;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& context) {
  if (!j.is_array()) {
    throw ValidationError(context + ": expected an array of numbers");
  }
  Eigen::VectorXd out(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ValidationError(context + ": expected an array of numbers");
    }
    out(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& context) {
  if (!j.is_array() || j.empty()) {
    throw ValidationError(context + ": expected a non-empty array of rows");
  }
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Eigen::MatrixXd out(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ValidationError(context + ": ragged rows");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) {
        throw ValidationError(context + ": expected numeric entries");
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return out;
}

json box_to_json(const OperatingBox& box) {
  return json{{"lower", vector_to_json(box.lower)}, {"upper", vector_to_json(box.upper)}};
}

OperatingBox box_from_json(const json& j, const std::string& context) {
  if (!j.is_object() || !j.contains("lower") || !j.contains("upper")) {
    throw ValidationError(context + ": box needs lower and upper arrays");
  }
  return OperatingBox(vector_from_json(j.at("lower"), context + ".lower"),
                      vector_from_json(j.at("upper"), context + ".upper"));
}

SyntheticLpvPlant plant_from_json(const json& j, const std::string& origin) {
  if (!j.is_object()) {
    throw ValidationError(origin + ": expected a plant object");
  }
  const int n = j.at("state_dim").get<int>();
  const int m = j.at("input_dim").get<int>();
  const int d = j.at("sched_dim").get<int>();
  const OperatingBox box = box_from_json(j.at("box"), origin + ":box");
  const double margin = j.value("stability_margin", 0.9);

  SyntheticLpvPlant plant;
  if (j.contains("a_const")) {
    plant.state_dim = n;
    plant.input_dim = m;
    plant.sched_dim = d;
    plant.box = box;
    plant.stability_margin = margin;
    plant.a_const = matrix_from_json(j.at("a_const"), origin + ":a_const");
    plant.b_const = matrix_from_json(j.at("b_const"), origin + ":b_const");
    for (const auto& block : j.at("a_coeffs")) {
      plant.a_coeffs.push_back(matrix_from_json(block, origin + ":a_coeffs"));
    }
    for (const auto& block : j.at("b_coeffs")) {
      plant.b_coeffs.push_back(matrix_from_json(block, origin + ":b_coeffs"));
    }
    plant.noise_cov = matrix_from_json(j.at("noise_cov"), origin + ":noise_cov");
  } else {
    if (!j.contains("noise_std") || !j.contains("seed")) {
      throw ValidationError(origin +
                            ": plant needs either explicit coefficients (a_const, ...) or a "
                            "generator description (noise_std, seed)");
    }
    plant = SyntheticLpvPlant::random(n, m, d, box, margin, j.at("noise_std").get<double>(),
                                      j.at("seed").get<std::uint64_t>());
  }
  const std::string kind = j.value("noise_kind", std::string("gaussian"));
  if (kind == "gaussian") {
    plant.noise_kind = SyntheticLpvPlant::NoiseKind::gaussian;
  } else if (kind == "uniform") {
    plant.noise_kind = SyntheticLpvPlant::NoiseKind::uniform;
  } else {
    throw ValidationError(origin + ": noise_kind must be \"gaussian\" or \"uniform\"");
  }
  plant.noise_gradient = j.value("noise_gradient", 0.0);
  plant.validate();
  return plant;
}

}  // namespace detail

namespace {

using detail::json;

std::string meta_path_for(const std::string& csv_path) {
  const std::string suffix = ".csv";
  if (csv_path.size() > suffix.size() &&
      csv_path.compare(csv_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return csv_path.substr(0, csv_path.size() - suffix.size()) + ".meta.json";
  }
  return csv_path + ".meta.json";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

double parse_field(const std::string& field, const std::string& path, long line) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    std::ostringstream msg;
    msg << path << ": line " << line << ": not a number: \"" << field << "\"";
    throw ParseError(msg.str(), line);
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_dataset(const TimeSeriesData& data, const std::string& csv_path, std::uint64_t seed,
                   const std::string& units) {
  data.validate();
  const int n = data.state_dim();
  const int m = data.input_dim();

  std::ostringstream out;
  out << "k";
  for (int j = 0; j < n; ++j) {
    out << ",x" << j + 1;
  }
  for (int j = 0; j < m; ++j) {
    out << ",u" << j + 1;
  }
  out << "\n";
  for (int k = 0; k < data.sample_count(); ++k) {
    out << k;
    for (int j = 0; j < n; ++j) {
      out << "," << format_double(data.states(k, j));
    }
    for (int j = 0; j < m; ++j) {
      out << "," << format_double(data.inputs(k, j));
    }
    out << "\n";
  }
  detail::write_text_file(csv_path, out.str());

  json meta{{"format", "gprlpv-dataset"},
            {"format_version", detail::kFormatVersion},
            {"state_dim", n},
            {"input_dim", m},
            {"samples", data.sample_count()},
            {"seed", seed},
            {"units", units},
            {"theta", detail::vector_to_json(data.operating_point)}};
  detail::save_json_file(meta_path_for(csv_path), meta);
}

TimeSeriesData read_dataset(const std::string& csv_path) {
  const std::string meta_path = meta_path_for(csv_path);
  const json meta = detail::load_json_file(meta_path);
  detail::require_version(meta, "gprlpv-dataset", meta_path);
  const int n = meta.at("state_dim").get<int>();
  const int m = meta.at("input_dim").get<int>();
  const int samples = meta.at("samples").get<int>();
  if (n < 1 || m < 1 || samples < 1) {
    throw ValidationError(meta_path + ": invalid dimensions");
  }

  const std::string text = detail::read_text_file(csv_path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(csv_path + ": empty file", 1);
  }
  const auto header = split_csv_line(line);
  const std::size_t expected = static_cast<std::size_t>(1 + n + m);
  if (header.size() != expected) {
    std::ostringstream msg;
    msg << csv_path << ": header has " << header.size() << " columns, expected " << expected
        << " (k, " << n << " states, " << m << " inputs)";
    throw ParseError(msg.str(), 1);
  }

  TimeSeriesData data;
  data.states.resize(samples, n);
  data.inputs.resize(samples, m);
  data.operating_point = detail::vector_from_json(meta.at("theta"), meta_path + ":theta");

  long lineno = 1;
  int row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != expected) {
      std::ostringstream msg;
      msg << csv_path << ": line " << lineno << " has " << fields.size()
          << " columns, expected " << expected;
      throw ParseError(msg.str(), lineno);
    }
    if (row >= samples) {
      std::ostringstream msg;
      msg << csv_path << ": more data rows than the " << samples << " declared in the sidecar";
      throw ParseError(msg.str(), lineno);
    }
    for (int j = 0; j < n; ++j) {
      data.states(row, j) = parse_field(fields[1 + j], csv_path, lineno);
    }
    for (int j = 0; j < m; ++j) {
      data.inputs(row, j) = parse_field(fields[1 + n + j], csv_path, lineno);
    }
    ++row;
  }
  if (row != samples) {
    std::ostringstream msg;
    msg << csv_path << ": found " << row << " data rows, sidecar declares " << samples;
    throw ParseError(msg.str(), lineno);
  }
  data.validate();
  return data;
}

std::vector<ImportedDataset> import_external_datasets(const std::vector<std::string>& paths) {
  std::vector<ImportedDataset> out;
  out.reserve(paths.size());
  for (const auto& path : paths) {
    ImportedDataset item;
    item.data = read_dataset(path);
    const auto check = check_persistency_of_excitation(item.data);
    item.excitation_ok = check.ok;
    item.smallest_singular_value = check.smallest_singular_value;
    out.push_back(std::move(item));
  }
  return out;
}

void write_record(const CampaignRecord& record, int sched_dim, const std::string& path) {
  std::ostringstream out;
  out << "iteration";
  for (int k = 0; k < sched_dim; ++k) {
    out << ",theta_" << k + 1;
  }
  out << ",volume\n";
  for (const auto& entry : record.entries) {
    out << entry.iteration;
    for (int k = 0; k < sched_dim; ++k) {
      if (entry.theta.size() == sched_dim) {
        out << "," << format_double(entry.theta(k));
      } else {
        out << ",nan";
      }
    }
    out << "," << format_double(entry.volume) << "\n";
  }
  detail::write_text_file(path, out.str());
}

void write_timings(const CampaignRecord& record, const std::string& path) {
  std::ostringstream out;
  out << "iteration,duration_seconds\n";
  char buf[32];
  for (const auto& entry : record.entries) {
    std::snprintf(buf, sizeof(buf), "%.6f", entry.duration_seconds);
    out << entry.iteration << "," << buf << "\n";
  }
  detail::write_text_file(path, out.str());
}

void save_model(const GprLpvModel& model, const std::string& path) {
  const auto& hyper = model.hyper();
  json elements = json::array();
  for (int flat = 0; flat < model.element_count(); ++flat) {
    const auto& el = model.element(flat);
    elements.push_back(
        json{{"key", GprLpvModel::element_key(model.state_dim(), model.input_dim(), flat)},
             {"sigma", el.kernel().signal_std},
             {"prior_mean", el.prior_mean().constant},
             {"labels", detail::vector_to_json(el.dataset().labels)},
             {"noise_sd", detail::vector_to_json(el.dataset().noise_sd)}});
  }
  json j{{"format", "gprlpv-model"},
         {"format_version", detail::kFormatVersion},
         {"state_dim", model.state_dim()},
         {"input_dim", model.input_dim()},
         {"sched_dim", model.sched_dim()},
         {"box", detail::box_to_json(model.box())},
         {"hyper",
          json{{"length_scales", detail::vector_to_json(hyper.length_scales)},
               {"sigma_factor", hyper.sigma_factor},
               {"sigma_floor", hyper.sigma_floor},
               {"prior_a_diag", hyper.prior_a_diag},
               {"reresolve_sigma_on_append", hyper.reresolve_sigma_on_append}}},
         {"points", detail::matrix_to_json(model.points())},
         {"elements", std::move(elements)}};
  detail::save_json_file(path, j);
}

GprLpvModel load_model(const std::string& path) {
  const json j = detail::load_json_file(path);
  detail::require_version(j, "gprlpv-model", path);
  const int n = j.at("state_dim").get<int>();
  const int m = j.at("input_dim").get<int>();
  const int d = j.at("sched_dim").get<int>();
  const OperatingBox box = detail::box_from_json(j.at("box"), path + ":box");
  if (box.dim() != d) {
    throw ValidationError(path + ": box dimension does not match sched_dim");
  }
  const json& h = j.at("hyper");
  HyperConfig hyper;
  hyper.length_scales = detail::vector_from_json(h.at("length_scales"), path + ":length_scales");
  hyper.sigma_factor = h.at("sigma_factor").get<double>();
  hyper.sigma_floor = h.at("sigma_floor").get<double>();
  hyper.prior_a_diag = h.at("prior_a_diag").get<double>();
  hyper.reresolve_sigma_on_append = h.at("reresolve_sigma_on_append").get<bool>();

  Eigen::MatrixXd points(0, d);
  if (!j.at("points").empty()) {
    points = detail::matrix_from_json(j.at("points"), path + ":points");
    if (points.cols() != d) {
      throw ValidationError(path + ": point dimension does not match sched_dim");
    }
  }

  const json& els = j.at("elements");
  const int total = n * n + n * m;
  if (!els.is_array() || static_cast<int>(els.size()) != total) {
    std::ostringstream msg;
    msg << path << ": expected " << total << " elements, found " << els.size();
    throw ValidationError(msg.str());
  }
  std::vector<GprLpvModel::ElementData> elements(total);
  for (int flat = 0; flat < total; ++flat) {
    const json& ej = els[flat];
    const std::string key = ej.at("key").get<std::string>();
    if (key != GprLpvModel::element_key(n, m, flat)) {
      throw ValidationError(path + ": element keys out of order at " + key);
    }
    GprLpvModel::ElementData el;
    el.sigma = ej.at("sigma").get<double>();
    el.prior_mean = ej.at("prior_mean").get<double>();
    el.labels = detail::vector_from_json(ej.at("labels"), path + ":labels");
    el.noise_sd = detail::vector_from_json(ej.at("noise_sd"), path + ":noise_sd");
    elements[flat] = std::move(el);
  }
  return GprLpvModel::from_parts(n, m, box, hyper, points, std::move(elements));
}

void save_plant(const SyntheticLpvPlant& plant, const std::string& path) {
  plant.validate();
  json a_coeffs = json::array();
  json b_coeffs = json::array();
  for (const auto& block : plant.a_coeffs) {
    a_coeffs.push_back(detail::matrix_to_json(block));
  }
  for (const auto& block : plant.b_coeffs) {
    b_coeffs.push_back(detail::matrix_to_json(block));
  }
  json j{{"format", "gprlpv-plant"},
         {"format_version", detail::kFormatVersion},
         {"state_dim", plant.state_dim},
         {"input_dim", plant.input_dim},
         {"sched_dim", plant.sched_dim},
         {"box", detail::box_to_json(plant.box)},
         {"stability_margin", plant.stability_margin},
         {"noise_kind",
          plant.noise_kind == SyntheticLpvPlant::NoiseKind::gaussian ? "gaussian" : "uniform"},
         {"noise_gradient", plant.noise_gradient},
         {"a_const", detail::matrix_to_json(plant.a_const)},
         {"a_coeffs", std::move(a_coeffs)},
         {"b_const", detail::matrix_to_json(plant.b_const)},
         {"b_coeffs", std::move(b_coeffs)},
         {"noise_cov", detail::matrix_to_json(plant.noise_cov)}};
  detail::save_json_file(path, j);
}

SyntheticLpvPlant load_plant(const std::string& path) {
  const json j = detail::load_json_file(path);
  detail::require_version(j, "gprlpv-plant", path);
  return detail::plant_from_json(j, path);
}

void export_surface(const GprLpvModel& model, const std::vector<int>& resolution,
                    const std::string& out_path, const std::string& element_key, int threads) {
  if (model.sched_dim() != 2) {
    throw ValidationError("surface export supports 2-D operating spaces only");
  }
  if (resolution.size() != 2 || resolution[0] < 2 || resolution[1] < 2) {
    throw ValidationError("surface export: resolution must be two integers >= 2");
  }
  const auto points = grid_points(model.box(), resolution);

  std::ostringstream out;
  if (element_key.empty()) {
    const Eigen::VectorXd values = evaluate_criterion(model, points, threads);
    out << "theta_1,theta_2,g\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
      out << format_double(points[i](0)) << "," << format_double(points[i](1)) << ","
          << format_double(values(static_cast<Eigen::Index>(i))) << "\n";
    }
  } else {
    const int flat =
        GprLpvModel::element_index(model.state_dim(), model.input_dim(), element_key);
    const auto& el = model.element(flat);
    out << "theta_1,theta_2,mean,variance\n";
    for (const auto& theta : points) {
      const auto pred = el.predict(theta);
      out << format_double(theta(0)) << "," << format_double(theta(1)) << ","
          << format_double(pred.mean) << "," << format_double(pred.variance) << "\n";
    }
  }
  detail::write_text_file(out_path, out.str());
}

}  // namespace gprlpv
