#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "windgat/model.hpp"
#include "windgat/tensor.hpp"
#include "windgat/training.hpp"

namespace windgat {

struct HeadAttention {
  Shape dims;                 // [N, N] or [N, N, F]
  std::vector<double> alpha;  // row-major, softmax over axis 1
};

struct StreamAttention {
  std::string name;            // "scalar" or "variable"
  std::vector<double> a_hat;   // [N × N]
  std::vector<HeadAttention> heads;
};

// Learned attention and adjacency averaged over a batch of instances.
struct AttentionReport {
  std::vector<std::string> cities;
  std::vector<std::string> variables;
  std::size_t instances = 0;
  std::vector<StreamAttention> streams;  // scalar first, then variable

  // Largest |Σ_j α - 1| over every softmax slice of every head.
  double max_row_sum_error() const;
};

// Forward every instance (no gradient tracking) and take the arithmetic
// mean of each α and Â. Throws DataError on an empty batch.
AttentionReport collect_attention(const MultistreamGatModel& model,
                                  const InstanceView& instances,
                                  std::vector<std::string> cities,
                                  std::vector<std::string> variables);

// Instance-count weighted mean of two reports over disjoint batches.
AttentionReport merge_reports(const AttentionReport& a, const AttentionReport& b);

// Schema: {format, cities, variables, instances,
//          streams: [{name, a_hat: [[...]], heads: [{alpha: [...], dims}]}]}
nlohmann::json to_json(const AttentionReport& report);
AttentionReport report_from_json(const nlohmann::json& j);

// Throws IoError if the file cannot be written.
void serialize_report(const AttentionReport& report,
                      const std::filesystem::path& path);
AttentionReport read_report(const std::filesystem::path& path);

}  // namespace windgat
