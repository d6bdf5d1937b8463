// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#include "twinlink/dataset_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace twinlink::io {

using nlohmann::ordered_json;

std::string sample_to_jsonl(const scene::Sample& s) {
    ordered_json j;
    j["id"] = s.id;
    j["t"] = s.timestamp;
    j["y"] = s.label;
    j["src"] = s.source == scene::Source::Grid ? "grid" : "veh";
    ordered_json paths = ordered_json::array();
    for (const auto& p : s.paths) {
        ordered_json jp;
        jp["re"] = p.gain.real();
        jp["im"] = p.gain.imag();
        jp["tau"] = p.delay;
        jp["az"] = p.azimuth;
        jp["el"] = p.elevation;
        jp["kind"] = p.kind == scene::PathKind::LoS ? "los" : "refl";
        paths.push_back(std::move(jp));
    }
    j["paths"] = std::move(paths);
    return j.dump();
}

scene::Sample sample_from_jsonl(const std::string& line) {
    const auto j = ordered_json::parse(line);
    scene::Sample s;
    s.id = j.at("id").get<std::string>();
    s.timestamp = j.at("t").get<double>();
    s.label = j.at("y").get<int>();
    const auto src = j.at("src").get<std::string>();
    if (src == "grid")
        s.source = scene::Source::Grid;
    else if (src == "veh")
        s.source = scene::Source::Vehicular;
    else
        throw std::runtime_error("dataset: unknown src '" + src + "'");
    for (const auto& jp : j.at("paths")) {
        scene::PathRecord p;
        p.gain = {jp.at("re").get<double>(), jp.at("im").get<double>()};
        p.delay = jp.at("tau").get<double>();
        p.azimuth = jp.at("az").get<double>();
        p.elevation = jp.at("el").get<double>();
        const auto kind = jp.at("kind").get<std::string>();
        if (kind == "los")
            p.kind = scene::PathKind::LoS;
        else if (kind == "refl")
            p.kind = scene::PathKind::Reflected;
        else
            throw std::runtime_error("dataset: unknown path kind '" + kind + "'");
        s.paths.push_back(p);
    }
    return s;
}

void write_dataset(std::ostream& os, const std::vector<scene::Sample>& samples) {
    for (const auto& s : samples) os << sample_to_jsonl(s) << '\n';
}

void write_dataset_file(const std::string& path, const std::vector<scene::Sample>& samples) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("dataset: cannot open '" + path + "' for writing");
    write_dataset(os, samples);
}

std::vector<scene::Sample> read_dataset(std::istream& is) {
    std::vector<scene::Sample> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        out.push_back(sample_from_jsonl(line));
    }
    return out;
}

std::vector<scene::Sample> read_dataset_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("dataset: cannot open '" + path + "'");
    return read_dataset(is);
}

}  // namespace twinlink::io
