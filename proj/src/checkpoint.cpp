#include "lrcp/checkpoint.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace lrcp {

using nlohmann::json;

namespace {
constexpr int kFormatVersion = 1;

json tensor_to_json(const std::string& name, const double* data, long size,
                    std::vector<long> shape) {
    json t;
    t["shape"] = shape;
    t["data"] = std::vector<double>(data, data + size);
    (void)name;
    return t;
}
}  // namespace

void atomic_write_text(const std::string& path, const std::string& contents) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write file: " + tmp);
        out << contents;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw DataError("cannot rename " + tmp + " to " + path);
}

void save_model(const Model& model, const std::string& path) {
    const NetworkParams& p = model.params;
    json doc;
    doc["format_version"] = kFormatVersion;
    doc["meta"] = {
        {"num_series", p.num_series()},
        {"input_width", p.input_width()},
        {"hidden", p.hidden()},
        {"embed_dim", p.embed_dim()},
        {"rank", p.rank()},
        {"num_layers", p.num_layers()},
        {"dropout_rate", p.dropout_rate},
        {"frequency", frequency_to_string(model.frequency)},
        {"series_ids", model.series_ids},
        {"context_length", model.context_length},
    };
    json tensors;
    NetworkParams& mut = const_cast<NetworkParams&>(p);
    for (const auto& view : tensor_views(mut)) {
        std::vector<long> shape;
        // shapes are recoverable from meta; store flat length for checking
        shape.push_back(view.size);
        tensors[view.name] = tensor_to_json(view.name, view.data, view.size, shape);
    }
    doc["tensors"] = tensors;
    json ecdfs = json::array();
    for (const auto& t : model.transforms) {
        ecdfs.push_back({{"sorted_values", t.cdf.sorted_values},
                         {"m", t.cdf.m},
                         {"delta", t.cdf.delta},
                         {"jitter_scale", t.cdf.jitter_scale}});
    }
    doc["ecdf"] = ecdfs;
    atomic_write_text(path, doc.dump(2));
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("malformed checkpoint " + path + ": " + e.what());
    }
    if (doc.value("format_version", -1) != kFormatVersion)
        throw DataError("unsupported checkpoint format_version");

    const json& meta = doc.at("meta");
    Model model;
    model.frequency = frequency_from_string(meta.at("frequency"));
    model.series_ids = meta.at("series_ids").get<std::vector<std::string>>();
    model.context_length = meta.at("context_length");

    Rng dummy(0);
    model.params = init_params(meta.at("num_series"), meta.at("input_width"),
                               meta.at("hidden"), meta.at("embed_dim"),
                               meta.at("rank"), meta.at("num_layers"),
                               meta.at("dropout_rate"), dummy);
    for (auto& view : tensor_views(model.params)) {
        const json& t = doc.at("tensors").at(view.name);
        auto data = t.at("data").get<std::vector<double>>();
        if (static_cast<long>(data.size()) != view.size)
            throw DataError("checkpoint tensor " + view.name + " has length " +
                            std::to_string(data.size()) + ", expected " +
                            std::to_string(view.size));
        std::copy(data.begin(), data.end(), view.data);
    }
    for (const json& e : doc.at("ecdf")) {
        EmpiricalCdf cdf;
        cdf.sorted_values = e.at("sorted_values").get<std::vector<double>>();
        cdf.m = e.at("m");
        cdf.delta = e.at("delta");
        cdf.jitter_scale = e.at("jitter_scale");
        model.transforms.push_back({std::move(cdf)});
    }
    return model;
}

}  // namespace lrcp
