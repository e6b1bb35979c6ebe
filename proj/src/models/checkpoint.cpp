#include "seqemo/models/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include <json.hpp>

namespace seqemo {

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");
static_assert(sizeof(float) == 4);

namespace {

using nlohmann::json;

constexpr char kMagic[] = "SEQEMO1\n";  // 8 bytes including the newline
constexpr int kFormatVersion = 1;

json layer_to_json(const LayerSpec& l) {
  return json{{"kind", layer_kind_name(l.kind)}, {"filters", l.filters},
              {"width", l.width},               {"stride", l.stride},
              {"pool", l.pool},                 {"units", l.units},
              {"rate", l.rate},                 {"classes", l.classes},
              {"dropout_after", l.dropout_after}};
}

LayerSpec layer_from_json(const json& j) {
  LayerSpec l;
  l.kind = parse_layer_kind(j.at("kind").get<std::string>());
  l.filters = j.at("filters").get<int64_t>();
  l.width = j.at("width").get<int64_t>();
  l.stride = j.at("stride").get<int64_t>();
  l.pool = j.at("pool").get<int64_t>();
  l.units = j.at("units").get<int64_t>();
  l.rate = j.at("rate").get<double>();
  l.classes = j.at("classes").get<int64_t>();
  l.dropout_after = j.at("dropout_after").get<double>();
  return l;
}

json spec_to_json(const ModelSpec& spec) {
  json layers = json::array();
  for (const auto& l : spec.layers) layers.push_back(layer_to_json(l));
  return json{{"name", spec.name},
              {"num_classes", spec.num_classes},
              {"input_dim", spec.input_dim},
              {"layers", layers}};
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec spec;
  spec.name = j.at("name").get<std::string>();
  spec.num_classes = j.at("num_classes").get<int64_t>();
  spec.input_dim = j.at("input_dim").get<int64_t>();
  for (const auto& lj : j.at("layers")) spec.layers.push_back(layer_from_json(lj));
  spec.validate();
  return spec;
}

}  // namespace

void save_checkpoint(Model<float>& model, const CheckpointMeta& meta,
                     const std::string& path) {
  json tensors = json::array();
  std::vector<const Tensor<float>*> order;
  int64_t offset = 0;
  model.visit_params([&](const std::string& name, Tensor<float>& p, Tensor<float>&) {
    tensors.push_back(json{{"name", name}, {"shape", p.shape()}, {"offset", offset}});
    order.push_back(&p);
    offset += p.size();
  });

  json header{{"format_version", kFormatVersion},
              {"model", spec_to_json(model.spec())},
              {"tensors", tensors},
              {"metadata",
               {{"seed", std::to_string(meta.seed)},
                {"epoch", meta.epoch},
                {"fold", meta.fold},
                {"classes", meta.classes}}}};
  if (meta.has_feature_norm) {
    header["metadata"]["feature_mean"] = meta.feature_mean;
    header["metadata"]["feature_std"] = meta.feature_std;
  }

  const std::string header_text = header.dump();
  const std::uint32_t header_len = static_cast<std::uint32_t>(header_text.size());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(cat("cannot write checkpoint ", path));
  out.write(kMagic, 8);
  out.write(reinterpret_cast<const char*>(&header_len), 4);
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const Tensor<float>* t : order)
    out.write(reinterpret_cast<const char*>(t->data()),
              static_cast<std::streamsize>(t->size() * 4));
  if (!out) throw IoError(cat("write failed for checkpoint ", path));
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError(cat("cannot open checkpoint ", path));
  const int64_t file_size = static_cast<int64_t>(in.tellg());
  in.seekg(0);

  char magic[8];
  std::uint32_t header_len = 0;
  if (file_size < 12 || !in.read(magic, 8) ||
      std::memcmp(magic, kMagic, 8) != 0)
    throw DataError(cat("checkpoint ", path, ": bad magic, not a checkpoint"));
  in.read(reinterpret_cast<char*>(&header_len), 4);
  if (!in || file_size < 12 + static_cast<int64_t>(header_len))
    throw DataError(cat("checkpoint ", path, ": truncated header"));

  std::string header_text(header_len, '\0');
  in.read(header_text.data(), header_len);
  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::exception& e) {
    throw DataError(cat("checkpoint ", path, ": unreadable header: ", e.what()));
  }

  LoadedCheckpoint result;
  try {
    const int version = header.at("format_version").get<int>();
    if (version != kFormatVersion)
      throw DataError(cat("checkpoint ", path, ": unsupported format version ",
                          version, ", expected ", kFormatVersion));
    result.spec = spec_from_json(header.at("model"));

    const auto& mj = header.at("metadata");
    result.meta.seed = std::stoull(mj.at("seed").get<std::string>());
    result.meta.epoch = mj.at("epoch").get<int64_t>();
    result.meta.fold = mj.at("fold").get<int64_t>();
    result.meta.classes = mj.at("classes").get<std::vector<std::string>>();
    if (mj.contains("feature_mean")) {
      result.meta.has_feature_norm = true;
      result.meta.feature_mean = mj.at("feature_mean").get<std::vector<float>>();
      result.meta.feature_std = mj.at("feature_std").get<std::vector<float>>();
    }

    result.model = std::make_unique<Model<float>>(result.spec);

    // Index the model's parameters, then satisfy every file tensor from it.
    std::map<std::string, Tensor<float>*> params;
    result.model->visit_params(
        [&](const std::string& name, Tensor<float>& p, Tensor<float>&) {
          params[name] = &p;
        });

    const auto& tensors = header.at("tensors");
    if (tensors.size() != params.size())
      throw DataError(cat("checkpoint ", path, ": holds ", tensors.size(),
                          " tensors but the model needs ", params.size()));

    int64_t total_floats = 0;
    for (const auto& tj : tensors)
      total_floats += [&] {
        int64_t n = 1;
        for (int64_t d : tj.at("shape").get<std::vector<int64_t>>()) n *= d;
        return n;
      }();
    const int64_t blob_bytes = file_size - 12 - static_cast<int64_t>(header_len);
    if (blob_bytes != total_floats * 4)
      throw DataError(cat("checkpoint ", path, ": payload of ", blob_bytes,
                          " bytes does not match the tensor index (",
                          total_floats * 4, " expected)"));

    std::vector<float> blob(static_cast<size_t>(total_floats));
    in.read(reinterpret_cast<char*>(blob.data()), total_floats * 4);
    if (!in) throw DataError(cat("checkpoint ", path, ": truncated payload"));

    for (const auto& tj : tensors) {
      const std::string name = tj.at("name").get<std::string>();
      auto it = params.find(name);
      if (it == params.end())
        throw DataError(cat("checkpoint ", path, ": tensor \"", name,
                            "\" does not exist in the model"));
      Tensor<float>& p = *it->second;
      const auto shape = tj.at("shape").get<std::vector<int64_t>>();
      if (shape != p.shape())
        throw DataError(cat("checkpoint ", path, ": tensor \"", name,
                            "\" shape mismatch"));
      const int64_t off = tj.at("offset").get<int64_t>();
      if (off < 0 || off + p.size() > total_floats)
        throw DataError(cat("checkpoint ", path, ": tensor \"", name,
                            "\" offset out of range"));
      std::memcpy(p.data(), blob.data() + off,
                  static_cast<size_t>(p.size()) * 4);
    }
  } catch (const json::exception& e) {
    throw DataError(cat("checkpoint ", path, ": malformed header field: ",
                        e.what()));
  }
  return result;
}

}  // namespace seqemo
