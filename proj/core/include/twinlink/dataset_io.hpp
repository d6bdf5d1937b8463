// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#ifndef TWINLINK_DATASET_IO_HPP
#define TWINLINK_DATASET_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "twinlink/scene.hpp"

namespace twinlink::io {

// JSON Lines, one sample per line:
// {"id":..., "t":..., "y":0|1, "src":"grid"|"veh", "paths":[{"re","im","tau","az","el","kind"}]}
std::string sample_to_jsonl(const scene::Sample& s);
scene::Sample sample_from_jsonl(const std::string& line);

void write_dataset(std::ostream& os, const std::vector<scene::Sample>& samples);
void write_dataset_file(const std::string& path, const std::vector<scene::Sample>& samples);

std::vector<scene::Sample> read_dataset(std::istream& is);
std::vector<scene::Sample> read_dataset_file(const std::string& path);

}  // namespace twinlink::io

#endif  // TWINLINK_DATASET_IO_HPP
