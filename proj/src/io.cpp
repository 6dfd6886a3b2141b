#include "navgraph/io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace navgraph {

namespace {
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error(context + ": cannot parse number '" + s + "'");
  }
  return v;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}
}  // namespace

std::string format_double(double x) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

DataMatrix read_data_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.size() < 2) {
    throw std::runtime_error(path + ": need a header and at least one row");
  }
  DataMatrix data;
  data.node_names = split_csv_line(lines[0]);
  const std::size_t p = data.node_names.size();
  data.values = Matrix(lines.size() - 1, p);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_csv_line(lines[r]);
    if (fields.size() != p) {
      throw std::runtime_error(path + ": row " + std::to_string(r) +
                               " has " + std::to_string(fields.size()) +
                               " fields, expected " + std::to_string(p));
    }
    for (std::size_t c = 0; c < p; ++c) {
      data.values(r - 1, c) = parse_double(fields[c], path);
    }
  }
  return data;
}

void write_data_csv(const std::string& path, const DataMatrix& data) {
  auto out = open_out(path);
  const auto names = data.node_names.empty()
                         ? std::vector<std::string>()
                         : data.node_names;
  for (Eigen::Index j = 0; j < data.n_nodes(); ++j) {
    if (j) out << ',';
    out << (j < static_cast<Eigen::Index>(names.size())
                ? names[j]
                : "node_" + std::to_string(j + 1));
  }
  out << '\n';
  for (Eigen::Index i = 0; i < data.n_samples(); ++i) {
    for (Eigen::Index j = 0; j < data.n_nodes(); ++j) {
      if (j) out << ',';
      out << format_double(data.values(i, j));
    }
    out << '\n';
  }
}

AuxiliaryMatrix read_aux_csv(const std::string& path,
                             const std::vector<std::string>& node_names) {
  const auto lines = read_lines(path);
  if (lines.size() < 2) {
    throw std::runtime_error(path + ": need a header and at least one row");
  }
  const auto header = split_csv_line(lines[0]);
  if (header.size() < 2) {
    throw std::runtime_error(path +
                             ": need a node column and >= 1 variable");
  }
  AuxiliaryMatrix aux;
  aux.var_names.assign(header.begin() + 1, header.end());
  const std::size_t q = aux.var_names.size();
  const std::size_t p = lines.size() - 1;
  aux.values = Matrix(p, q);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_csv_line(lines[r]);
    if (fields.size() != q + 1) {
      throw std::runtime_error(path + ": row " + std::to_string(r) +
                               " has the wrong field count");
    }
    if (!node_names.empty()) {
      if (r - 1 >= node_names.size() || fields[0] != node_names[r - 1]) {
        throw std::runtime_error(path + ": node name '" + fields[0] +
                                 "' does not match the data header order");
      }
    }
    for (std::size_t c = 0; c < q; ++c) {
      aux.values(r - 1, c) = parse_double(fields[c + 1], path);
    }
  }
  return aux;
}

void write_aux_csv(const std::string& path, const AuxiliaryMatrix& aux,
                   const std::vector<std::string>& node_names) {
  auto out = open_out(path);
  out << "node";
  for (Eigen::Index q = 0; q < aux.n_vars(); ++q) {
    out << ',' << (q < static_cast<Eigen::Index>(aux.var_names.size())
                       ? aux.var_names[q]
                       : "var_" + std::to_string(q + 1));
  }
  out << '\n';
  for (Eigen::Index i = 0; i < aux.values.rows(); ++i) {
    out << (i < static_cast<Eigen::Index>(node_names.size())
                ? node_names[i]
                : "node_" + std::to_string(i + 1));
    for (Eigen::Index q = 0; q < aux.n_vars(); ++q) {
      out << ',' << format_double(aux.values(i, q));
    }
    out << '\n';
  }
}

Matrix read_square_csv(const std::string& path,
                       std::vector<std::string>* names) {
  const auto lines = read_lines(path);
  if (lines.size() < 2) throw std::runtime_error(path + ": empty matrix");
  const auto header = split_csv_line(lines[0]);
  const std::size_t p = header.size();
  if (lines.size() - 1 != p) {
    throw std::runtime_error(path + ": matrix is not square");
  }
  if (names) *names = header;
  Matrix m(p, p);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_csv_line(lines[r]);
    if (fields.size() != p) {
      throw std::runtime_error(path + ": ragged matrix row");
    }
    for (std::size_t c = 0; c < p; ++c) {
      m(r - 1, c) = parse_double(fields[c], path);
    }
  }
  return m;
}

void write_square_csv(const std::string& path, const Matrix& m,
                      const std::vector<std::string>& names) {
  auto out = open_out(path);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (j) out << ',';
    out << (j < static_cast<Eigen::Index>(names.size())
                ? names[j]
                : "node_" + std::to_string(j + 1));
  }
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_effects_csv(const std::string& path, const Vector& effects,
                       const std::vector<std::string>& names) {
  auto out = open_out(path);
  out << "variable,effect\n";
  for (Eigen::Index q = 0; q < effects.size(); ++q) {
    out << (q < static_cast<Eigen::Index>(names.size())
                ? names[q]
                : "var_" + std::to_string(q + 1))
        << ',' << format_double(effects[q]) << '\n';
  }
}

void write_edges_csv(const std::string& path,
                     const std::vector<EdgeRecord>& edges) {
  auto out = open_out(path);
  out << "node_i,node_j,ppi,omega,selected_mpm,selected_fdr\n";
  for (const auto& e : edges) {
    out << e.node_i << ',' << e.node_j << ',' << format_double(e.ppi) << ','
        << format_double(e.omega) << ',' << (e.selected_mpm ? 1 : 0) << ','
        << (e.selected_fdr ? 1 : 0) << '\n';
  }
}

std::vector<EdgeRecord> read_edges_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": empty file");
  std::vector<EdgeRecord> edges;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto f = split_csv_line(lines[r]);
    if (f.size() < 4) throw std::runtime_error(path + ": short edge row");
    EdgeRecord e;
    e.node_i = f[0];
    e.node_j = f[1];
    e.ppi = parse_double(f[2], path);
    e.omega = parse_double(f[3], path);
    if (f.size() > 4) e.selected_mpm = f[4] == "1";
    if (f.size() > 5) e.selected_fdr = f[5] == "1";
    edges.push_back(e);
  }
  return edges;
}

void write_variables_csv(const std::string& path,
                         const std::vector<VariableRecord>& vars) {
  auto out = open_out(path);
  out << "name,ppi,beta_mean,beta_sd,ci_low,ci_high\n";
  for (const auto& v : vars) {
    out << v.name << ',' << format_double(v.ppi) << ','
        << format_double(v.beta_mean) << ',' << format_double(v.beta_sd)
        << ',' << format_double(v.ci_low) << ',' << format_double(v.ci_high)
        << '\n';
  }
}

void write_trace_csv(const std::string& path,
                     const std::vector<double>& trace) {
  auto out = open_out(path);
  out << "iteration,objective\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << (i + 1) << ',' << format_double(trace[i]) << '\n';
  }
}

namespace {
nlohmann::json matrix_to_json(const navgraph::Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

navgraph::Matrix matrix_from_json(const nlohmann::json& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows[0].size() : 0;
  navgraph::Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

nlohmann::json vector_to_json(const navgraph::Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

navgraph::Vector vector_from_json(const nlohmann::json& arr) {
  navgraph::Vector v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}
}  // namespace

std::string state_to_json(const VariationalState& s) {
  nlohmann::json j;
  j["omega"] = matrix_to_json(s.omega);
  j["delta1"] = matrix_to_json(s.delta1);
  j["z1"] = matrix_to_json(s.z1);
  j["z2"] = matrix_to_json(s.z2);
  j["alpha_hat"] = matrix_to_json(s.alpha_hat);
  j["alpha_tau"] = s.alpha_tau;
  j["beta_tau"] = s.beta_tau;
  j["zeta_mean"] = s.zeta_mean;
  j["zeta_var"] = s.zeta_var;
  j["beta_mean"] = vector_to_json(s.beta_mean);
  j["beta_var"] = vector_to_json(s.beta_var);
  j["gamma1"] = vector_to_json(s.gamma1);
  j["gamma_logit"] = vector_to_json(s.gamma_logit);
  j["alpha_o"] = s.alpha_o;
  j["beta_o"] = s.beta_o;
  j["alpha_sigma"] = s.alpha_sigma;
  j["beta_sigma"] = s.beta_sigma;
  j["elbo"] = s.elbo;
  return j.dump();
}

VariationalState state_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  VariationalState s;
  s.omega = matrix_from_json(j.at("omega"));
  s.delta1 = matrix_from_json(j.at("delta1"));
  s.z1 = matrix_from_json(j.at("z1"));
  s.z2 = matrix_from_json(j.at("z2"));
  s.alpha_hat = matrix_from_json(j.at("alpha_hat"));
  s.alpha_tau = j.at("alpha_tau").get<double>();
  s.beta_tau = j.at("beta_tau").get<double>();
  s.zeta_mean = j.at("zeta_mean").get<double>();
  s.zeta_var = j.at("zeta_var").get<double>();
  s.beta_mean = vector_from_json(j.at("beta_mean"));
  s.beta_var = vector_from_json(j.at("beta_var"));
  s.gamma1 = vector_from_json(j.at("gamma1"));
  s.gamma_logit = vector_from_json(j.at("gamma_logit"));
  s.alpha_o = j.at("alpha_o").get<double>();
  s.beta_o = j.at("beta_o").get<double>();
  s.alpha_sigma = j.at("alpha_sigma").get<double>();
  s.beta_sigma = j.at("beta_sigma").get<double>();
  s.elbo = j.at("elbo").get<double>();
  return s;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[8192];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

std::string software_version() { return "0.1.0"; }

}  // namespace navgraph
