#include "sare/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace sare {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::vector<Descriptor>& rows, int d_in,
               const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  out << "image_id,place_id,x,y";
  for (int i = 0; i < d_in; ++i) out << ",f" << i;
  out << "\n";
  for (const Descriptor& d : rows) {
    out << d.image_id << ',' << d.place_id << ',' << format_double(d.x) << ','
        << format_double(d.y);
    for (Eigen::Index i = 0; i < d.features.size(); ++i) {
      out << ',' << format_double(d.features[i]);
    }
    out << "\n";
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, int line_no,
                             const std::string& what) {
  std::ostringstream msg;
  msg << path.string() << ":" << line_no << ": " << what;
  throw std::runtime_error(msg.str());
}

std::vector<Descriptor> read_csv(const std::filesystem::path& path,
                                 int expected_dim,
                                 std::unordered_set<int>* seen_ids = nullptr) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    parse_fail(path, 1, "missing header");
  }
  const std::vector<std::string> header = split_line(line);
  if (header.size() < 5 || header[0] != "image_id" || header[1] != "place_id" ||
      header[2] != "x" || header[3] != "y") {
    parse_fail(path, 1, "bad header, expected image_id,place_id,x,y,f0,...");
  }
  const int dim = static_cast<int>(header.size()) - 4;
  if (expected_dim >= 0 && dim != expected_dim) {
    parse_fail(path, 1,
               "feature dimension " + std::to_string(dim) +
                   " does not match meta d_in " + std::to_string(expected_dim));
  }
  std::vector<Descriptor> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != header.size()) {
      parse_fail(path, line_no,
                 "expected " + std::to_string(header.size()) + " fields, got " +
                     std::to_string(fields.size()));
    }
    Descriptor d;
    try {
      std::size_t pos = 0;
      d.image_id = std::stoi(fields[0], &pos);
      if (pos != fields[0].size()) throw std::invalid_argument(fields[0]);
      d.place_id = std::stoi(fields[1], &pos);
      if (pos != fields[1].size()) throw std::invalid_argument(fields[1]);
      d.x = std::stod(fields[2], &pos);
      if (pos != fields[2].size()) throw std::invalid_argument(fields[2]);
      d.y = std::stod(fields[3], &pos);
      if (pos != fields[3].size()) throw std::invalid_argument(fields[3]);
      d.features.resize(dim);
      for (int i = 0; i < dim; ++i) {
        d.features[i] = std::stod(fields[4 + i], &pos);
        if (pos != fields[4 + i].size()) {
          throw std::invalid_argument(fields[4 + i]);
        }
      }
    } catch (const std::exception& e) {
      parse_fail(path, line_no, std::string("malformed field: ") + e.what());
    }
    if (!is_finite(d.features) || !std::isfinite(d.x) || !std::isfinite(d.y)) {
      parse_fail(path, line_no, "non-finite value");
    }
    if (seen_ids && !seen_ids->insert(d.image_id).second) {
      parse_fail(path, line_no,
                 "duplicate image_id " + std::to_string(d.image_id));
    }
    rows.push_back(std::move(d));
  }
  return rows;
}

}  // namespace

PlaceDataset synth_generate(const SynthConfig& config) {
  if (config.n_places < 2) {
    throw std::invalid_argument("synth: n_places must be >= 2");
  }
  if (config.views_per_place < 1 || config.queries_per_place < 0) {
    throw std::invalid_argument("synth: bad views/queries per place");
  }
  if (config.d_in < 2) {
    throw std::invalid_argument("synth: d_in must be >= 2");
  }
  if (config.view_noise_sigma < 0.0) {
    throw std::invalid_argument("synth: negative noise sigma");
  }
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Place centers: uniform with hard minimum separation, bounded rejection.
  std::vector<std::pair<double, double>> centers;
  const long max_attempts = 10000L * config.n_places;
  long attempts = 0;
  while (static_cast<int>(centers.size()) < config.n_places) {
    if (++attempts > max_attempts) {
      throw std::invalid_argument(
          "synth: could not place " + std::to_string(config.n_places) +
          " centers at >= " + std::to_string(kMinPlaceSeparationM) +
          " m separation; increase map_extent_m (currently " +
          format_double(config.map_extent_m) + ")");
    }
    const double cx = uni(rng) * config.map_extent_m;
    const double cy = uni(rng) * config.map_extent_m;
    bool ok = true;
    for (const auto& [ox, oy] : centers) {
      if (std::hypot(cx - ox, cy - oy) < kMinPlaceSeparationM) {
        ok = false;
        break;
      }
    }
    if (ok) centers.emplace_back(cx, cy);
  }

  std::vector<Vec> latents(config.n_places);
  for (int k = 0; k < config.n_places; ++k) {
    Vec v(config.d_in);
    for (int i = 0; i < config.d_in; ++i) v[i] = gauss(rng);
    latents[k] = l2_normalize(v);
  }

  auto jitter = [&](double cx, double cy) {
    const double angle = 2.0 * std::numbers::pi * uni(rng);
    const double radius = kViewPositionJitterM * std::sqrt(uni(rng));
    return std::pair<double, double>(cx + radius * std::cos(angle),
                                     cy + radius * std::sin(angle));
  };
  auto noisy_view = [&](int place, int image_id) {
    Descriptor d;
    d.image_id = image_id;
    d.place_id = place;
    d.features = latents[place];
    for (int i = 0; i < config.d_in; ++i) {
      d.features[i] += config.view_noise_sigma * gauss(rng);
    }
    const auto [x, y] = jitter(centers[place].first, centers[place].second);
    d.x = x;
    d.y = y;
    return d;
  };

  PlaceDataset ds;
  ds.meta.synth = config;
  int next_id = 0;
  for (int k = 0; k < config.n_places; ++k) {
    for (int v = 0; v < config.views_per_place; ++v) {
      ds.database.push_back(noisy_view(k, next_id++));
    }
  }
  std::vector<std::vector<Descriptor>> queries_by_place(config.n_places);
  for (int k = 0; k < config.n_places; ++k) {
    for (int v = 0; v < config.queries_per_place; ++v) {
      queries_by_place[k].push_back(noisy_view(k, next_id++));
    }
  }

  // 70/15/15 split by place.
  std::vector<int> order(config.n_places);
  for (int k = 0; k < config.n_places; ++k) order[k] = k;
  std::shuffle(order.begin(), order.end(), rng);
  const int n_train = static_cast<int>(std::lround(0.70 * config.n_places));
  const int n_val = static_cast<int>(std::lround(0.15 * config.n_places));
  for (int idx = 0; idx < config.n_places; ++idx) {
    auto& dst = idx < n_train              ? ds.queries_train
                : idx < n_train + n_val    ? ds.queries_val
                                           : ds.queries_test;
    for (Descriptor& d : queries_by_place[order[idx]]) {
      dst.push_back(std::move(d));
    }
  }
  auto by_id = [](const Descriptor& a, const Descriptor& b) {
    return a.image_id < b.image_id;
  };
  std::sort(ds.queries_train.begin(), ds.queries_train.end(), by_id);
  std::sort(ds.queries_val.begin(), ds.queries_val.end(), by_id);
  std::sort(ds.queries_test.begin(), ds.queries_test.end(), by_id);
  validate_dataset(ds);
  return ds;
}

void validate_dataset(const PlaceDataset& dataset) {
  std::unordered_set<int> ids;
  std::unordered_set<int> db_places;
  Eigen::Index dim = -1;
  auto check = [&](const std::vector<Descriptor>& rows, const char* name) {
    for (const Descriptor& d : rows) {
      if (!ids.insert(d.image_id).second) {
        throw std::invalid_argument(std::string("dataset: duplicate image_id ") +
                                    std::to_string(d.image_id) + " in " + name);
      }
      if (dim < 0) dim = d.features.size();
      if (d.features.size() != dim) {
        throw std::invalid_argument(
            std::string("dataset: inconsistent feature dimension in ") + name);
      }
      if (!is_finite(d.features)) {
        throw std::invalid_argument(std::string("dataset: non-finite features in ") +
                                    name);
      }
    }
  };
  check(dataset.database, "database");
  for (const Descriptor& d : dataset.database) db_places.insert(d.place_id);
  check(dataset.queries_train, "queries_train");
  check(dataset.queries_val, "queries_val");
  check(dataset.queries_test, "queries_test");
  auto check_places = [&](const std::vector<Descriptor>& rows, const char* name) {
    for (const Descriptor& d : rows) {
      if (d.place_id >= 0 && !db_places.count(d.place_id)) {
        throw std::invalid_argument(
            std::string("dataset: query place ") + std::to_string(d.place_id) +
            " in " + name + " has no database view");
      }
    }
  };
  check_places(dataset.queries_train, "queries_train");
  check_places(dataset.queries_val, "queries_val");
  check_places(dataset.queries_test, "queries_test");
}

void save_dataset(const PlaceDataset& dataset,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const int d_in = dataset.database.empty()
                       ? dataset.meta.synth.d_in
                       : static_cast<int>(dataset.database[0].features.size());
  write_csv(dataset.database, d_in, dir / "database.csv");
  write_csv(dataset.queries_train, d_in, dir / "queries_train.csv");
  write_csv(dataset.queries_val, d_in, dir / "queries_val.csv");
  write_csv(dataset.queries_test, d_in, dir / "queries_test.csv");

  json meta;
  meta["format"] = dataset.meta.format;
  meta["n_places"] = dataset.meta.synth.n_places;
  meta["views_per_place"] = dataset.meta.synth.views_per_place;
  meta["queries_per_place"] = dataset.meta.synth.queries_per_place;
  meta["d_in"] = d_in;
  meta["view_noise_sigma"] = dataset.meta.synth.view_noise_sigma;
  meta["map_extent_m"] = dataset.meta.synth.map_extent_m;
  meta["seed"] = dataset.meta.synth.seed;
  std::ofstream out(dir / "meta.json");
  if (!out) {
    throw std::runtime_error("cannot open for writing: " +
                             (dir / "meta.json").string());
  }
  out << meta.dump(2) << "\n";
}

PlaceDataset load_dataset(const std::filesystem::path& dir) {
  const std::filesystem::path meta_path = dir / "meta.json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) {
    throw std::runtime_error("cannot open: " + meta_path.string());
  }
  json meta;
  try {
    meta_in >> meta;
  } catch (const json::exception& e) {
    throw std::runtime_error(meta_path.string() + ": " + e.what());
  }
  PlaceDataset ds;
  try {
    ds.meta.format = meta.at("format").get<std::string>();
    ds.meta.synth.n_places = meta.at("n_places").get<int>();
    ds.meta.synth.views_per_place = meta.at("views_per_place").get<int>();
    ds.meta.synth.queries_per_place = meta.at("queries_per_place").get<int>();
    ds.meta.synth.d_in = meta.at("d_in").get<int>();
    ds.meta.synth.view_noise_sigma = meta.at("view_noise_sigma").get<double>();
    ds.meta.synth.map_extent_m = meta.at("map_extent_m").get<double>();
    ds.meta.synth.seed = meta.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw std::runtime_error(meta_path.string() + ": " + e.what());
  }
  const int d_in = ds.meta.synth.d_in;
  std::unordered_set<int> seen_ids;
  ds.database = read_csv(dir / "database.csv", d_in, &seen_ids);
  ds.queries_train = read_csv(dir / "queries_train.csv", d_in, &seen_ids);
  ds.queries_val = read_csv(dir / "queries_val.csv", d_in, &seen_ids);
  ds.queries_test = read_csv(dir / "queries_test.csv", d_in, &seen_ids);
  validate_dataset(ds);
  return ds;
}

}  // namespace sare
