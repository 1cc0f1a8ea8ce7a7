#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ndscope/model.hpp"

namespace ndscope {

using json = nlohmann::ordered_json;

struct ModelFile {
  NdsDefinition nds;
  std::optional<SCMatrix> scm;
  std::optional<ConstraintSpec> constraints;
};

/// Candidate lumped model; E is taken from the paired NDS when absent.
struct LumpedFile {
  std::optional<RatMat> E;
  RatMat A, B, C, D;
};

namespace io {

inline Rat to_rat(const json& v, const std::string& where) {
  try {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rat(v.dump());
    if (v.is_number_float()) return parse_rational(v.dump());
  } catch (const ParseError& e) {
    throw SchemaError(where + ": " + e.what());
  }
  throw SchemaError(where + ": expected a decimal or fraction string");
}

/// Array of rows; "[]" is the empty matrix with `empty_rows` rows and no columns.
inline RatMat to_mat(const json& v, const std::string& where, std::size_t empty_rows = 0) {
  if (!v.is_array()) throw SchemaError(where + ": expected an array of rows");
  if (v.empty()) return RatMat(empty_rows, 0);
  const std::size_t rows = v.size();
  if (!v[0].is_array()) throw SchemaError(where + ": expected an array of rows");
  const std::size_t cols = v[0].size();
  RatMat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!v[i].is_array() || v[i].size() != cols) throw SchemaError(where + ": ragged matrix");
    for (std::size_t j = 0; j < cols; ++j)
      m(i, j) = to_rat(v[i][j], where + "[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]");
  }
  return m;
}

inline json from_mat(const RatMat& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(to_string(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json from_rats(const std::vector<Rat>& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(to_string(x));
  return out;
}

inline std::size_t to_index(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 1) throw SchemaError(where + ": expected a 1-based index");
  return static_cast<std::size_t>(v.get<long long>() - 1);
}

inline SubsystemRealization to_subsystem(const json& s, const std::string& where) {
  if (!s.is_object()) throw SchemaError(where + ": expected an object");
  static const char* kKeys[] = {"E", "A_xx", "B_xv", "B_xu", "C_zx", "C_yx", "D_zv", "D_zu", "D_yv", "D_yu"};
  for (const auto& [key, _] : s.items()) {
    bool known = false;
    for (const char* k : kKeys) known = known || key == k;
    if (!known) throw SchemaError(where + ": unknown key '" + key + "'");
  }
  for (const char* req : {"A_xx", "B_xv", "C_zx"})
    if (!s.contains(req)) throw SchemaError(where + ": missing " + std::string(req));

  auto get = [&](const char* key, std::size_t empty_rows) -> std::optional<RatMat> {
    if (!s.contains(key)) return std::nullopt;
    return to_mat(s.at(key), where + "." + key, empty_rows);
  };
  SubsystemRealization sub;
  sub.A_xx = *get("A_xx", 0);
  const std::size_t nx = sub.A_xx.rows();
  sub.B_xv = *get("B_xv", nx);
  sub.C_zx = *get("C_zx", 0);
  const std::size_t nv = sub.B_xv.cols(), nz = sub.C_zx.rows();

  auto b_xu = get("B_xu", nx);
  auto c_yx = get("C_yx", 0);
  auto d_zu = get("D_zu", nz);
  auto d_yv = get("D_yv", 0);
  auto d_yu = get("D_yu", 0);
  std::size_t nu = 0, ny = 0;
  if (b_xu && b_xu->cols()) nu = b_xu->cols();
  else if (d_zu && d_zu->cols()) nu = d_zu->cols();
  else if (d_yu && d_yu->cols()) nu = d_yu->cols();
  if (c_yx && c_yx->rows()) ny = c_yx->rows();
  else if (d_yv && d_yv->rows()) ny = d_yv->rows();
  else if (d_yu && d_yu->rows()) ny = d_yu->rows();

  // Empty or absent blocks take the inferred shape and are zero.
  auto fill = [](std::optional<RatMat> m, std::size_t r, std::size_t c) {
    if (!m || m->empty()) return RatMat(r, c);
    return *m;
  };
  sub.E = s.contains("E") ? to_mat(s.at("E"), where + ".E") : RatMat::identity(nx);
  sub.B_xu = fill(b_xu, nx, nu);
  sub.C_yx = fill(c_yx, ny, nx);
  sub.D_zv = fill(get("D_zv", nz), nz, nv);
  sub.D_zu = fill(d_zu, nz, nu);
  sub.D_yv = fill(d_yv, ny, nv);
  sub.D_yu = fill(d_yu, ny, nu);
  sub.validate(where);
  return sub;
}

inline ConstraintSpec to_constraints(const json& c, const NdsDefinition& nds) {
  if (!c.is_object() || c.size() != 1) throw SchemaError("constraints: expected exactly one of known_entries, affine");
  if (c.contains("known_entries")) {
    const json& k = c.at("known_entries");
    if (!k.is_object()) throw SchemaError("constraints.known_entries: expected an object");
    KnownEntries ke;
    if (k.contains("J")) {
      if (!k.at("J").is_array()) throw SchemaError("constraints.known_entries.J: expected an array");
      for (const auto& j : k.at("J")) ke.J.push_back(to_index(j, "constraints.known_entries.J"));
    }
    if (k.contains("I")) {
      if (!k.at("I").is_object()) throw SchemaError("constraints.known_entries.I: expected an object");
      for (const auto& [key, rows] : k.at("I").items()) {
        std::size_t col = 0;
        try {
          col = static_cast<std::size_t>(std::stoul(key));
        } catch (const std::exception&) {
          throw SchemaError("constraints.known_entries.I: key '" + key + "' is not an index");
        }
        if (col < 1) throw SchemaError("constraints.known_entries.I: indices are 1-based");
        if (!rows.is_array()) throw SchemaError("constraints.known_entries.I: expected arrays of rows");
        auto& dst = ke.I[col - 1];
        for (const auto& r : rows) dst.push_back(to_index(r, "constraints.known_entries.I." + key));
      }
    }
    for (auto j : ke.J)
      if (j >= nds.m_z()) throw IndexError("known_entries: column " + std::to_string(j + 1) + " out of range");
    for (const auto& [j, rows] : ke.I) {
      if (j >= nds.m_z()) throw IndexError("known_entries: column " + std::to_string(j + 1) + " out of range");
      for (auto r : rows)
        if (r >= nds.m_v()) throw IndexError("known_entries: row " + std::to_string(r + 1) + " out of range");
    }
    return ke;
  }
  if (c.contains("affine")) {
    const json& a = c.at("affine");
    if (!a.is_object() || !a.contains("phi0")) throw SchemaError("constraints.affine: missing phi0");
    AffineParam ap;
    ap.phi0 = to_mat(a.at("phi0"), "constraints.affine.phi0");
    nds.check_scm_shape(ap.phi0, "constraints.affine.phi0");
    if (a.contains("directions")) {
      if (!a.at("directions").is_array()) throw SchemaError("constraints.affine.directions: expected an array");
      for (const auto& d : a.at("directions")) {
        ap.directions.push_back(to_mat(d, "constraints.affine.directions"));
        nds.check_scm_shape(ap.directions.back(), "affine direction");
      }
    }
    if (a.contains("theta")) {
      if (!a.at("theta").is_array()) throw SchemaError("constraints.affine.theta: expected an array");
      for (const auto& t : a.at("theta")) ap.theta.push_back(to_rat(t, "constraints.affine.theta"));
    } else {
      ap.theta.assign(ap.directions.size(), Rat(0));
    }
    if (ap.theta.size() != ap.directions.size())
      throw IndexError("constraints.affine: theta length differs from direction count");
    return ap;
  }
  throw SchemaError("constraints: expected known_entries or affine");
}

inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace io

inline ModelFile parse_model(const std::string& text) {
  const json doc = io::parse_json_text(text, "model");
  if (!doc.is_object()) throw SchemaError("model: expected a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "time_domain" && key != "subsystems" && key != "scm" && key != "constraints")
      throw SchemaError("model: unknown key '" + key + "'");
  }
  ModelFile mf;
  if (doc.contains("time_domain")) {
    const json& td = doc.at("time_domain");
    if (td == "continuous") mf.nds.time_domain = TimeDomain::Continuous;
    else if (td == "discrete") mf.nds.time_domain = TimeDomain::Discrete;
    else throw SchemaError("time_domain must be \"continuous\" or \"discrete\"");
  }
  if (!doc.contains("subsystems") || !doc.at("subsystems").is_array() || doc.at("subsystems").empty())
    throw SchemaError("model: subsystems must be a nonempty array");
  std::size_t i = 0;
  for (const auto& s : doc.at("subsystems"))
    mf.nds.subsystems.push_back(io::to_subsystem(s, "subsystem " + std::to_string(++i)));
  mf.nds.validate();
  if (doc.contains("scm")) {
    mf.scm = io::to_mat(doc.at("scm"), "scm");
    mf.nds.check_scm_shape(*mf.scm);
  }
  if (doc.contains("constraints")) mf.constraints = io::to_constraints(doc.at("constraints"), mf.nds);
  return mf;
}

inline ModelFile load_model(const std::string& path) { return parse_model(io::read_file(path)); }

/// Inline rows "a,b;c,d" with decimal or fraction entries.
inline RatMat parse_matrix_inline(const std::string& text) {
  std::vector<std::vector<Rat>> rows;
  std::stringstream rs(text);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<Rat> r;
    std::stringstream cs(row);
    std::string cell;
    while (std::getline(cs, cell, ',')) r.push_back(parse_rational(cell));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError("empty matrix literal");
  RatMat m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw ParseError("ragged matrix literal '" + text + "'");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

/// A path to a JSON file (bare matrix or {"scm": …}) or an inline literal.
inline SCMatrix parse_scm_arg(const std::string& arg) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) {
    const json doc = io::parse_json_text(io::read_file(arg), arg);
    if (doc.is_object() && doc.contains("scm")) return io::to_mat(doc.at("scm"), "scm");
    return io::to_mat(doc, "scm");
  }
  return parse_matrix_inline(arg);
}

inline LumpedFile parse_lumped(const std::string& text) {
  const json doc = io::parse_json_text(text, "lumped model");
  if (!doc.is_object()) throw SchemaError("lumped model: expected a JSON object");
  for (const char* k : {"A", "B", "C", "D"})
    if (!doc.contains(k)) throw SchemaError("lumped model: missing " + std::string(k));
  LumpedFile lf;
  lf.A = io::to_mat(doc.at("A"), "A");
  lf.B = io::to_mat(doc.at("B"), "B", lf.A.rows());
  lf.C = io::to_mat(doc.at("C"), "C");
  lf.D = io::to_mat(doc.at("D"), "D", lf.C.rows());
  if (doc.contains("E")) lf.E = io::to_mat(doc.at("E"), "E");
  return lf;
}

inline json model_to_json(const NdsDefinition& nds) {
  json doc;
  doc["time_domain"] = nds.time_domain == TimeDomain::Continuous ? "continuous" : "discrete";
  doc["subsystems"] = json::array();
  for (const auto& s : nds.subsystems) {
    json j;
    j["E"] = io::from_mat(s.E);
    j["A_xx"] = io::from_mat(s.A_xx);
    j["B_xv"] = io::from_mat(s.B_xv);
    j["B_xu"] = io::from_mat(s.B_xu);
    j["C_zx"] = io::from_mat(s.C_zx);
    j["C_yx"] = io::from_mat(s.C_yx);
    j["D_zv"] = io::from_mat(s.D_zv);
    j["D_zu"] = io::from_mat(s.D_zu);
    j["D_yv"] = io::from_mat(s.D_yv);
    j["D_yu"] = io::from_mat(s.D_yu);
    doc["subsystems"].push_back(std::move(j));
  }
  return doc;
}

}  // namespace ndscope
