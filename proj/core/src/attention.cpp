#include "windgat/attention.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "windgat/checkpoint.hpp"
#include "windgat/errors.hpp"

namespace windgat {

using nlohmann::json;

namespace {

constexpr const char* kReportFormat = "windgat-attention-v1";

void accumulate(std::vector<double>& total, std::span<const double> values) {
  if (total.empty()) total.assign(values.size(), 0.0);
  for (std::size_t k = 0; k < values.size(); ++k) total[k] += values[k];
}

void scale_all(std::vector<double>& values, double factor) {
  for (double& v : values) v *= factor;
}

}  // namespace

double AttentionReport::max_row_sum_error() const {
  double worst = 0.0;
  for (const StreamAttention& stream : streams) {
    for (const HeadAttention& head : stream.heads) {
      const std::size_t n = head.dims.at(0);
      const std::size_t inner = head.dims.size() == 3 ? head.dims[2] : 1;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < inner; ++p) {
          double sum = 0.0;
          for (std::size_t j = 0; j < n; ++j) sum += head.alpha[(i * n + j) * inner + p];
          worst = std::max(worst, std::abs(sum - 1.0));
        }
      }
    }
  }
  return worst;
}

AttentionReport collect_attention(const MultistreamGatModel& model,
                                  const InstanceView& instances,
                                  std::vector<std::string> cities,
                                  std::vector<std::string> variables) {
  if (instances.count == 0) {
    throw DataError("collect_attention: empty batch of instances");
  }
  const ModelConfig& c = model.config();
  if (cities.size() != c.cities || variables.size() != c.variables) {
    throw DataError("collect_attention: labels do not match model shape");
  }
  NoGradGuard no_grad;
  AttentionReport report;
  report.cities = std::move(cities);
  report.variables = std::move(variables);
  report.instances = instances.count;
  report.streams.resize(2);
  report.streams[0].name = "scalar";
  report.streams[1].name = "variable";
  report.streams[0].heads.resize(c.scalar_heads);
  report.streams[1].heads.resize(c.variable_heads);

  for (std::size_t k = 0; k < instances.count; ++k) {
    const ForwardResult out = model.forward(instances.get(k).x);
    const AttentionCapture& cap = out.attention;
    accumulate(report.streams[0].a_hat, cap.scalar_adjacency.data());
    accumulate(report.streams[1].a_hat, cap.variable_adjacency.data());
    for (std::size_t h = 0; h < c.scalar_heads; ++h) {
      report.streams[0].heads[h].dims = cap.scalar_alpha[h].shape();
      accumulate(report.streams[0].heads[h].alpha, cap.scalar_alpha[h].data());
    }
    for (std::size_t h = 0; h < c.variable_heads; ++h) {
      report.streams[1].heads[h].dims = cap.variable_alpha[h].shape();
      accumulate(report.streams[1].heads[h].alpha, cap.variable_alpha[h].data());
    }
  }
  const double inv = 1.0 / static_cast<double>(instances.count);
  for (StreamAttention& stream : report.streams) {
    scale_all(stream.a_hat, inv);
    for (HeadAttention& head : stream.heads) scale_all(head.alpha, inv);
  }
  return report;
}

AttentionReport merge_reports(const AttentionReport& a, const AttentionReport& b) {
  if (a.cities != b.cities || a.variables != b.variables ||
      a.streams.size() != b.streams.size()) {
    throw DataError("merge_reports: reports describe different models");
  }
  const double total = static_cast<double>(a.instances + b.instances);
  const double wa = static_cast<double>(a.instances) / total;
  const double wb = static_cast<double>(b.instances) / total;
  auto blend = [wa, wb](const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DataError("merge_reports: shape mismatch");
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = wa * x[k] + wb * y[k];
    return out;
  };
  AttentionReport out = a;
  out.instances = a.instances + b.instances;
  for (std::size_t s = 0; s < a.streams.size(); ++s) {
    if (a.streams[s].heads.size() != b.streams[s].heads.size()) {
      throw DataError("merge_reports: head counts differ");
    }
    out.streams[s].a_hat = blend(a.streams[s].a_hat, b.streams[s].a_hat);
    for (std::size_t h = 0; h < a.streams[s].heads.size(); ++h) {
      out.streams[s].heads[h].alpha =
          blend(a.streams[s].heads[h].alpha, b.streams[s].heads[h].alpha);
    }
  }
  return out;
}

nlohmann::json to_json(const AttentionReport& report) {
  const std::size_t n = report.cities.size();
  json streams = json::array();
  for (const StreamAttention& stream : report.streams) {
    json rows = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back(std::vector<double>(stream.a_hat.begin() + i * n,
                                         stream.a_hat.begin() + (i + 1) * n));
    }
    json heads = json::array();
    for (const HeadAttention& head : stream.heads) {
      heads.push_back({{"alpha", head.alpha}, {"dims", head.dims}});
    }
    streams.push_back(
        {{"name", stream.name}, {"a_hat", std::move(rows)}, {"heads", std::move(heads)}});
  }
  return {{"format", kReportFormat},
          {"cities", report.cities},
          {"variables", report.variables},
          {"instances", report.instances},
          {"streams", std::move(streams)}};
}

AttentionReport report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kReportFormat) {
      throw ConfigError("unsupported attention report format");
    }
    AttentionReport report;
    report.cities = j.at("cities").get<std::vector<std::string>>();
    report.variables = j.at("variables").get<std::vector<std::string>>();
    report.instances = j.at("instances").get<std::size_t>();
    const std::size_t n = report.cities.size();
    for (const json& s : j.at("streams")) {
      StreamAttention stream;
      stream.name = s.at("name").get<std::string>();
      for (const json& row : s.at("a_hat")) {
        const auto values = row.get<std::vector<double>>();
        if (values.size() != n) throw ConfigError("a_hat row has wrong length");
        stream.a_hat.insert(stream.a_hat.end(), values.begin(), values.end());
      }
      if (stream.a_hat.size() != n * n) throw ConfigError("a_hat is not N x N");
      for (const json& h : s.at("heads")) {
        HeadAttention head;
        head.dims = h.at("dims").get<Shape>();
        head.alpha = h.at("alpha").get<std::vector<double>>();
        if (shape_numel(head.dims) != head.alpha.size()) {
          throw ConfigError("alpha length does not match dims");
        }
        stream.heads.push_back(std::move(head));
      }
      report.streams.push_back(std::move(stream));
    }
    return report;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed attention report: ") + e.what());
  }
}

void serialize_report(const AttentionReport& report,
                      const std::filesystem::path& path) {
  write_text_file(path, to_json(report).dump(1) + "\n");
}

AttentionReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return report_from_json(json::parse(buf.str()));
  } catch (const json::parse_error& e) {
    throw ConfigError("attention report is not valid JSON: " +
                      std::string(e.what()));
  }
}

}  // namespace windgat
