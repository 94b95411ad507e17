#include "windreg/model_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace windreg {

using nlohmann::json;

namespace {

json tree_node_to_json(const Tree& tree, std::size_t id) {
  const auto& n = tree.nodes()[id];
  if (n.leaf) return json{{"leaf", n.value}, {"samples", n.samples}, {"impurity", n.impurity}};
  return json{{"feature", n.feature},
              {"threshold", n.threshold},
              {"value", n.value},
              {"samples", n.samples},
              {"impurity", n.impurity},
              {"impurity_decrease", n.impurity_decrease},
              {"left", tree_node_to_json(tree, n.left)},
              {"right", tree_node_to_json(tree, n.right)}};
}

// Rebuilds the preorder node array; child indices follow from the order.
std::size_t tree_node_from_json(const json& j, std::vector<TreeNode>& nodes) {
  const std::size_t id = nodes.size();
  nodes.emplace_back();
  TreeNode node;
  node.samples = j.at("samples").get<std::size_t>();
  node.impurity = j.at("impurity").get<double>();
  if (j.contains("leaf")) {
    node.leaf = true;
    node.value = j.at("leaf").get<double>();
    nodes[id] = node;
    return id;
  }
  node.leaf = false;
  node.feature = j.at("feature").get<std::size_t>();
  node.threshold = j.at("threshold").get<double>();
  node.value = j.at("value").get<double>();
  node.impurity_decrease = j.at("impurity_decrease").get<double>();
  node.left = tree_node_from_json(j.at("left"), nodes);
  node.right = tree_node_from_json(j.at("right"), nodes);
  nodes[id] = node;
  return id;
}

json payload(const LinearModel& m) {
  return json{{"intercept", m.intercept}, {"slopes", m.slopes}, {"residual_std", m.residual_std}};
}

json payload(const KnnModel& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto r = m.standardized_features().row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return json{{"k", m.k()},
              {"distance", "euclidean"},
              {"centers", m.standardizer().centers()},
              {"scales", m.standardizer().scales()},
              {"standardized_features", std::move(rows)},
              {"targets", m.targets()}};
}

json payload(const Tree& t) {
  return json{{"feature_count", t.feature_count()}, {"root", tree_node_to_json(t, 0)}};
}

FittedModel model_from_json(Algorithm algorithm, const json& j) {
  switch (algorithm) {
    case Algorithm::Linear: {
      LinearModel m;
      m.intercept = j.at("intercept").get<double>();
      m.slopes = j.at("slopes").get<std::vector<double>>();
      m.residual_std = j.at("residual_std").get<double>();
      return m;
    }
    case Algorithm::Knn: {
      if (j.at("distance").get<std::string>() != "euclidean")
        throw Error(ErrorCode::CorruptFile, "unsupported distance metric");
      auto rows = j.at("standardized_features").get<std::vector<std::vector<double>>>();
      Standardizer s(j.at("centers").get<std::vector<double>>(), j.at("scales").get<std::vector<double>>());
      Matrix features = Matrix::from_rows(rows);
      if (rows.empty()) features = Matrix(0, s.dimension());
      return KnnModel(std::move(s), std::move(features), j.at("targets").get<std::vector<double>>(),
                      j.at("k").get<std::size_t>());
    }
    case Algorithm::Tree: {
      std::vector<TreeNode> nodes;
      tree_node_from_json(j.at("root"), nodes);
      return Tree(std::move(nodes), j.at("feature_count").get<std::size_t>());
    }
  }
  throw Error(ErrorCode::CorruptFile, "unknown algorithm");
}

}  // namespace

std::string serialize_model(const ModelFile& file) {
  json doc;
  doc["format"] = kModelFormatName;
  doc["version"] = file.version;
  doc["algorithm"] = to_string(algorithm_of(file.model));
  doc["metadata"] = json{{"rows", file.metadata.rows}, {"columns", file.metadata.columns}, {"seed", file.metadata.seed}};
  doc["model"] = std::visit([](const auto& m) { return payload(m); }, file.model);
  return doc.dump(1) + "\n";
}

ModelFile deserialize_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptFile, fmt::format("model file is not valid JSON ({})", e.what()));
  }
  try {
    if (!doc.is_object() || doc.value("format", "") != kModelFormatName)
      throw Error(ErrorCode::CorruptFile, "not a windreg model file");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw Error(ErrorCode::VersionMismatch,
                  fmt::format("model file version {}, this build reads version {}", version, kModelFormatVersion));
    const auto algorithm = parse_algorithm(doc.at("algorithm").get<std::string>());
    if (!algorithm) throw Error(ErrorCode::CorruptFile, "unknown algorithm tag");
    ModelFile file{version, model_from_json(*algorithm, doc.at("model")), {}};
    const auto& meta = doc.at("metadata");
    file.metadata.rows = meta.at("rows").get<std::size_t>();
    file.metadata.columns = meta.at("columns").get<std::vector<std::string>>();
    file.metadata.seed = meta.at("seed").get<std::uint64_t>();
    return file;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptFile, fmt::format("model file is malformed ({})", e.what()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::VersionMismatch || e.code() == ErrorCode::CorruptFile) throw;
    throw Error(ErrorCode::CorruptFile, e.what());
  }
}

void save_model(const ModelFile& file, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  out << serialize_model(file);
  if (!out) throw Error(ErrorCode::Io, fmt::format("write to '{}' failed", path.string()));
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace windreg
