#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "navgraph/types.hpp"

namespace navgraph {

// Shortest round-trip decimal formatting; all numeric file output goes
// through this so reruns are byte-identical.
std::string format_double(double x);

// CSV with a header row of node names; rows are samples. Missing or
// non-numeric fields are errors.
DataMatrix read_data_csv(const std::string& path);
void write_data_csv(const std::string& path, const DataMatrix& data);

// CSV whose first column holds node names (matched against the data header
// when provided) and remaining columns the auxiliary variables.
AuxiliaryMatrix read_aux_csv(const std::string& path,
                             const std::vector<std::string>& node_names);
void write_aux_csv(const std::string& path, const AuxiliaryMatrix& aux,
                   const std::vector<std::string>& node_names);

// Square numeric matrix with a header row (e.g. truth adjacency).
Matrix read_square_csv(const std::string& path,
                       std::vector<std::string>* names = nullptr);
void write_square_csv(const std::string& path, const Matrix& m,
                      const std::vector<std::string>& names);

// name,value two-column CSV (truth effects).
void write_effects_csv(const std::string& path, const Vector& effects,
                       const std::vector<std::string>& names);

// edges.csv: node_i,node_j,ppi,omega,selected_mpm,selected_fdr.
struct EdgeRecord {
  std::string node_i, node_j;
  double ppi = 0.0;
  double omega = 0.0;
  bool selected_mpm = false;
  bool selected_fdr = false;
};
void write_edges_csv(const std::string& path,
                     const std::vector<EdgeRecord>& edges);
std::vector<EdgeRecord> read_edges_csv(const std::string& path);

// variables.csv: name,ppi,beta_mean,beta_sd,ci_low,ci_high.
struct VariableRecord {
  std::string name;
  double ppi = 0.0;
  double beta_mean = 0.0;
  double beta_sd = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};
void write_variables_csv(const std::string& path,
                         const std::vector<VariableRecord>& vars);

void write_trace_csv(const std::string& path,
                     const std::vector<double>& trace);

// Full-precision JSON round trip of a variational state (doubles survive
// bit-exactly through shortest-round-trip formatting).
std::string state_to_json(const VariationalState& s);
VariationalState state_from_json(const std::string& text);

// 64-bit FNV-1a digest of a file's bytes, hex-encoded.
std::string file_digest(const std::string& path);

std::string software_version();

}  // namespace navgraph
