#include "wmt/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>
#include <vector>

#include "wmt/errors.hpp"

namespace wmt {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

template <class F>
auto guarded(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    parse_fail(where + ": " + e.what());
  }
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) parse_fail(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) parse_fail(where + ": missing field \"" + key + "\"");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) parse_fail(where + ": expected a number");
  return j.get<double>();
}

MeasureKind parse_kind(const json& j, const std::string& where) {
  if (!j.is_string()) parse_fail(where + ": kind must be a string");
  const auto s = j.get<std::string>();
  if (s == "gaussian") return MeasureKind::Gaussian;
  if (s == "discrete") return MeasureKind::Discrete;
  parse_fail(where + ": unknown kind \"" + s + "\"");
}

Measure measure_from_json(const json& j, MeasureKind kind, const std::string& where) {
  if (kind == MeasureKind::Gaussian) {
    return GaussianMeasure{number(require(j, "mean", where), where + ".mean"),
                           number(require(j, "variance", where), where + ".variance")};
  }
  const json& atoms = require(j, "atoms", where);
  const json& weights = require(j, "weights", where);
  if (!atoms.is_array() || !weights.is_array()) parse_fail(where + ": atoms and weights must be arrays");
  if (atoms.empty()) parse_fail(where + ": no atoms");
  if (atoms.size() != weights.size()) {
    throw Error(ErrorCode::BadWeights, where + ": " + std::to_string(atoms.size()) + " atoms but " +
                                           std::to_string(weights.size()) + " weights");
  }
  const std::size_t dim = atoms.front().is_array() ? atoms.front().size() : 0;
  std::vector<double> coords;
  std::vector<double> w;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::string at = where + ".atoms[" + std::to_string(i) + "]";
    if (!atoms[i].is_array()) parse_fail(at + ": expected an array");
    if (atoms[i].size() != dim) throw Error(ErrorCode::DimensionMismatch, at + ": inconsistent dimension");
    for (const auto& c : atoms[i]) coords.push_back(number(c, at));
    w.push_back(number(weights[i], where + ".weights[" + std::to_string(i) + "]"));
  }
  return DiscreteMeasure(dim, std::move(coords), std::move(w));
}

Coupling coupling_from_json(const json& j, const std::string& where) {
  const auto rows = require(j, "rows", where).get<std::size_t>();
  const auto cols = require(j, "cols", where).get<std::size_t>();
  const double p = j.contains("p") ? number(j["p"], where + ".p") : 2.0;
  std::vector<double> dense(rows * cols, 0.0);
  for (const auto& e : require(j, "entries", where)) {
    if (!e.is_array() || e.size() != 3) parse_fail(where + ": entries are [i, j, mass] triples");
    const auto r = e[0].get<std::size_t>();
    const auto c = e[1].get<std::size_t>();
    if (r >= rows || c >= cols) parse_fail(where + ": entry index out of range");
    dense[r * cols + c] = number(e[2], where);
  }
  return Coupling(rows, cols, std::move(dense), p);
}

Detail detail_from_json(const json& j, const std::string& where) {
  const auto type = require(j, "type", where).get<std::string>();
  if (type == "zero") return ZeroDetail{};
  if (type == "affine") {
    return AffineMap{number(require(j, "A", where), where + ".A"), number(require(j, "B", where), where + ".B")};
  }
  if (type != "plan") parse_fail(where + ": unknown detail type \"" + type + "\"");
  Coupling plan = coupling_from_json(require(j, "coupling", where), where + ".coupling");
  const json& disp = require(j, "displacements", where);
  if (!disp.is_array() || disp.size() != plan.rows()) parse_fail(where + ": displacement rows do not match the plan");
  TransportDetail d;
  for (std::size_t r = 0; r < disp.size(); ++r) {
    if (!disp[r].is_array() || disp[r].size() != plan.cols()) {
      parse_fail(where + ": displacement row " + std::to_string(r) + " does not match the plan");
    }
    for (const auto& v : disp[r]) {
      if (!v.is_array() || v.empty()) parse_fail(where + ": displacements must be vectors");
      if (d.dim == 0) d.dim = v.size();
      if (v.size() != d.dim) throw Error(ErrorCode::DimensionMismatch, where + ": inconsistent displacement dimension");
      for (const auto& c : v) d.displacements.push_back(number(c, where));
    }
  }
  d.plan = std::move(plan);
  return d;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_csv_row(std::string_view line, std::size_t line_no) {
  std::vector<double> out;
  std::size_t field = 0;
  while (true) {
    const auto comma = line.find(',');
    const auto cell = trim(line.substr(0, comma));
    ++field;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
      parse_fail("line " + std::to_string(line_no) + ", field " + std::to_string(field) + ": not a number: \"" +
                 std::string(cell) + "\"");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

FileFormat parse_format(std::string_view name) {
  if (name == "json") return FileFormat::Json;
  if (name == "csv") return FileFormat::Csv;
  throw Error(ErrorCode::BadParameter, "unknown format \"" + std::string(name) + "\" (json|csv)");
}

FileFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv" ? FileFormat::Csv : FileFormat::Json;
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

json to_json(const Measure& m) {
  if (const auto* g = std::get_if<GaussianMeasure>(&m)) {
    return {{"mean", g->mean()}, {"variance", g->variance()}};
  }
  const auto& d = std::get<DiscreteMeasure>(m);
  json atoms = json::array();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto a = d.atom(i);
    atoms.push_back(json(std::vector<double>(a.begin(), a.end())));
  }
  return {{"atoms", std::move(atoms)}, {"weights", std::vector<double>(d.weights().begin(), d.weights().end())}};
}

json to_json(const MeasureSequence& seq) {
  json elements = json::array();
  for (const auto& m : seq.elements) elements.push_back(to_json(m));
  return {{"kind", to_string(seq.kind())},
          {"level", seq.level},
          {"grid_origin", seq.grid_origin},
          {"elements", std::move(elements)}};
}

json to_json(const Detail& psi) {
  if (std::holds_alternative<ZeroDetail>(psi)) return {{"type", "zero"}};
  if (const auto* a = std::get_if<AffineMap>(&psi)) {
    return {{"type", "affine"}, {"A", a->slope}, {"B", a->intercept}};
  }
  const auto& t = std::get<TransportDetail>(psi);
  json disp = json::array();
  for (std::size_t i = 0; i < t.plan.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < t.plan.cols(); ++j) {
      const auto v = t.displacement(i, j);
      row.push_back(json(std::vector<double>(v.begin(), v.end())));
    }
    disp.push_back(std::move(row));
  }
  json entries = json::array();
  for (std::size_t i = 0; i < t.plan.rows(); ++i)
    for (std::size_t j = 0; j < t.plan.cols(); ++j)
      if (t.plan(i, j) > 0.0) entries.push_back({i, j, t.plan(i, j)});
  return {{"type", "plan"},
          {"displacements", std::move(disp)},
          {"coupling",
           {{"rows", t.plan.rows()}, {"cols", t.plan.cols()}, {"p", t.plan.cost_exponent()}, {"entries", entries}}}};
}

json to_json(const Pyramid& pyr) {
  json layers = json::array();
  for (const auto& layer : pyr.layers) {
    json details = json::array();
    for (const auto& d : layer.details) details.push_back(to_json(d));
    layers.push_back({{"level", layer.level}, {"details", std::move(details)}});
  }
  return {{"p", pyr.p},
          {"kind", to_string(pyr.kind)},
          {"coarse", to_json(pyr.coarse)},
          {"layers", std::move(layers)},
          {"norms", pyr.norms}};
}

MeasureSequence sequence_from_json(const json& j) {
  return guarded("sequence", [&] {
    const MeasureKind kind = parse_kind(require(j, "kind", "sequence"), "sequence");
    const json& elements = require(j, "elements", "sequence");
    if (!elements.is_array()) parse_fail("sequence: elements must be an array");
    if (elements.empty()) parse_fail("sequence: no elements");
    MeasureSequence seq;
    seq.elements.reserve(elements.size());
    for (std::size_t i = 0; i < elements.size(); ++i) {
      seq.elements.push_back(measure_from_json(elements[i], kind, "elements[" + std::to_string(i) + "]"));
    }
    seq.level = j.contains("level") ? j["level"].get<int>() : default_level(seq.size());
    seq.grid_origin = j.contains("grid_origin") ? number(j["grid_origin"], "grid_origin") : 0.0;
    validate_sequence(seq);
    return seq;
  });
}

Pyramid pyramid_from_json(const json& j) {
  return guarded("pyramid", [&] {
    Pyramid pyr;
    pyr.p = j.contains("p") ? number(j["p"], "pyramid.p") : 2.0;
    pyr.kind = parse_kind(require(j, "kind", "pyramid"), "pyramid");
    pyr.coarse = sequence_from_json(require(j, "coarse", "pyramid"));
    const json& layers = require(j, "layers", "pyramid");
    if (!layers.is_array()) parse_fail("pyramid: layers must be an array");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const std::string where = "layers[" + std::to_string(l) + "]";
      DetailLayer layer;
      layer.level = require(layers[l], "level", where).get<int>();
      if (layer.level != static_cast<int>(l) + 1) {
        throw Error(ErrorCode::Misaligned, where + ": expected level " + std::to_string(l + 1));
      }
      const json& details = require(layers[l], "details", where);
      if (!details.is_array()) parse_fail(where + ": details must be an array");
      for (std::size_t i = 0; i < details.size(); ++i) {
        layer.details.push_back(detail_from_json(details[i], where + ".details[" + std::to_string(i) + "]"));
      }
      pyr.layers.push_back(std::move(layer));
    }
    if (j.contains("norms") && !j["norms"].empty()) {
      pyr.norms = j["norms"].get<std::vector<std::vector<double>>>();
      validate_pyramid(pyr);
    } else {
      recompute_norms(pyr);
    }
    return pyr;
  });
}

MeasureSequence sequence_from_csv(std::string_view text) {
  std::vector<double> support;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto values = parse_csv_row(line, line_no);
    if (support.empty()) {
      support = std::move(values);
      continue;
    }
    if (values.size() != support.size()) {
      parse_fail("line " + std::to_string(line_no) + ": expected " + std::to_string(support.size()) +
                 " weights, got " + std::to_string(values.size()));
    }
    rows.push_back(std::move(values));
  }
  if (support.empty()) parse_fail("empty CSV file");
  if (rows.empty()) parse_fail("CSV file has a header but no weight rows");

  MeasureSequence seq;
  seq.elements.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    try {
      seq.elements.emplace_back(DiscreteMeasure(1, support, rows[r]));
    } catch (const Error& e) {
      throw Error(e.code(), "weight row " + std::to_string(r + 1) + ": " + e.what());
    }
  }
  seq.level = default_level(seq.size());
  validate_sequence(seq);
  return seq;
}

std::string sequence_to_csv(const MeasureSequence& seq) {
  if (seq.elements.empty() || seq.kind() != MeasureKind::Discrete) {
    throw Error(ErrorCode::BadParameter, "CSV output needs a discrete sequence");
  }
  std::map<double, std::size_t> columns;
  for (const auto& m : seq.elements) {
    const auto& d = std::get<DiscreteMeasure>(m);
    if (d.dim() != 1) throw Error(ErrorCode::DimensionMismatch, "CSV output needs scalar support");
    for (std::size_t i = 0; i < d.size(); ++i) columns.emplace(d.atom(i)[0], 0);
  }
  std::size_t c = 0;
  std::string out;
  for (auto& [x, idx] : columns) {
    idx = c++;
    if (idx > 0) out += ',';
    out += format_double(x);
  }
  out += '\n';
  std::vector<double> row(columns.size());
  for (const auto& m : seq.elements) {
    const auto& d = std::get<DiscreteMeasure>(m);
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) row[columns.at(d.atom(i)[0])] = d.weight(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0) out += ',';
      out += format_double(row[k]);
    }
    out += '\n';
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return buf.str();
}

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot move output into place at " + path.string());
  }
}

namespace {

json parse_json_text(const std::string& text, const std::filesystem::path& path) {
  if (trim(text).empty()) parse_fail(path.string() + ": empty file");
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    parse_fail(path.string() + ": " + e.what());
  }
}

}  // namespace

json read_json(const std::filesystem::path& path) { return parse_json_text(read_text(path), path); }

MeasureSequence read_sequence(const std::filesystem::path& path, FileFormat format) {
  const std::string text = read_text(path);
  if (format == FileFormat::Csv) return sequence_from_csv(text);
  return sequence_from_json(parse_json_text(text, path));
}

MeasureSequence read_sequence(const std::filesystem::path& path) { return read_sequence(path, format_from_path(path)); }

void write_sequence(const std::filesystem::path& path, const MeasureSequence& seq, FileFormat format) {
  write_text_atomic(path, format == FileFormat::Csv ? sequence_to_csv(seq) : to_json(seq).dump(1) + "\n");
}

Pyramid read_pyramid(const std::filesystem::path& path) {
  return pyramid_from_json(parse_json_text(read_text(path), path));
}

void write_pyramid(const std::filesystem::path& path, const Pyramid& pyr) {
  write_text_atomic(path, to_json(pyr).dump() + "\n");
}

std::string norms_csv(const Pyramid& pyr) {
  std::string out = "level,index,time,norm\n";
  for (std::size_t l = 0; l < pyr.norms.size(); ++l) {
    const int absolute = pyr.coarse.level + static_cast<int>(l) + 1;
    for (std::size_t i = 0; i < pyr.norms[l].size(); ++i) {
      const double t = pyr.coarse.grid_origin + std::ldexp(static_cast<double>(i), -absolute);
      out += std::to_string(l + 1) + ',' + std::to_string(i) + ',' + format_double(t) + ',' +
             format_double(pyr.norms[l][i]) + '\n';
    }
  }
  return out;
}

GaussianCurveSpec curve_spec_from_json(const json& j) {
  return guarded("curve spec", [&] {
    GaussianCurveSpec s;
    auto gaussian = [&](const char* key, GaussianMeasure fallback) {
      if (!j.contains(key)) return fallback;
      return GaussianMeasure{j[key].at("mean").get<double>(), j[key].at("variance").get<double>()};
    };
    s.start = gaussian("start", s.start);
    s.end = gaussian("end", s.end);
    s.n_samples = j.value("n_samples", s.n_samples);
    s.bump_amplitude = j.value("bump_amplitude", s.bump_amplitude);
    if (j.contains("noise") && !j["noise"].is_null()) {
      CurveNoise n;
      n.mean_sigma = j["noise"].value("mean_sigma", n.mean_sigma);
      n.var_sigma = j["noise"].value("var_sigma", n.var_sigma);
      n.taper = j["noise"].value("taper", n.taper);
      s.noise = n;
    }
    if (j.contains("jump") && !j["jump"].is_null()) {
      s.jump = CurveJump{j["jump"].value("variance_scale", CurveJump{}.variance_scale)};
    }
    s.seed = j.value("seed", s.seed);
    return s;
  });
}

json to_json(const GaussianCurveSpec& s) {
  json j = {{"start", to_json(Measure{s.start})},
            {"end", to_json(Measure{s.end})},
            {"n_samples", s.n_samples},
            {"bump_amplitude", s.bump_amplitude},
            {"noise", nullptr},
            {"jump", nullptr},
            {"seed", s.seed}};
  if (s.noise) {
    j["noise"] = {{"mean_sigma", s.noise->mean_sigma}, {"var_sigma", s.noise->var_sigma}, {"taper", s.noise->taper}};
  }
  if (s.jump) j["jump"] = {{"variance_scale", s.jump->variance_scale}};
  return j;
}

DipoleSpec dipole_spec_from_json(const json& j) {
  return guarded("dipole spec", [&] {
    DipoleSpec s;
    s.n_particles = j.value("n_particles", s.n_particles);
    if (j.contains("start_center")) {
      const auto c = j["start_center"].get<std::vector<double>>();
      if (c.size() != 2) throw Error(ErrorCode::BadSpec, "start_center must have two coordinates");
      s.start_center = {c[0], c[1]};
    }
    s.start_spread = j.value("start_spread", s.start_spread);
    s.timestep = j.value("timestep", s.timestep);
    s.n_steps = j.value("n_steps", s.n_steps);
    s.field_noise_sigma = j.value("field_noise_sigma", s.field_noise_sigma);
    s.charge = j.value("charge", s.charge);
    s.seed = j.value("seed", s.seed);
    return s;
  });
}

json to_json(const DipoleSpec& s) {
  return {{"n_particles", s.n_particles},
          {"start_center", {s.start_center[0], s.start_center[1]}},
          {"start_spread", s.start_spread},
          {"timestep", s.timestep},
          {"n_steps", s.n_steps},
          {"field_noise_sigma", s.field_noise_sigma},
          {"charge", s.charge},
          {"seed", s.seed}};
}

}  // namespace wmt
