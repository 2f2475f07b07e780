#pragma once

// Text formats: snapshot and feature CSVs, ZPD CSVs, key-value config files.
// Readers skip blank lines, '#' comments and a leading header row, and report
// malformed rows as ParseError with the 1-based line number.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "zgcnet/dyngraph.hpp"
#include "zgcnet/zigzag.hpp"

namespace zgcnet {

/// Rows `t,u,v,w`. A row with w = 0 marks u and v active without an edge, and
/// `t,u,u,0` marks a lone node. Snapshots are created for every t between the
/// smallest and largest index seen. `universe` = 0 infers N from the largest id.
DynamicNetwork read_snapshot_csv(std::istream& is, std::size_t universe = 0);
void write_snapshot_csv(std::ostream& os, const DynamicNetwork& net);

/// Rows `t,node,f1,...,fF`; every (t, node) pair for t in 1..T must appear once.
/// `t` is 1-based, matching snapshot indices.
FeatureSeries read_feature_csv(std::istream& is);
void write_feature_csv(std::ostream& os, const FeatureSeries& series);

/// Rows `p,twice_birth,twice_death`.
void write_zpd_csv(std::ostream& os, const ZPD& zpd);
ZPD read_zpd_csv(std::istream& is);

/// `key = value` or `key value` lines; '#' starts a comment.
std::map<std::string, std::string> read_key_values(std::istream& is);

std::vector<std::string> split(const std::string& s, char sep);

}  // namespace zgcnet
