// Copyright 2026 The BCIE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "bcie/kg_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "bcie/error.hpp"

namespace bcie {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

[[noreturn]] void parse_error(const std::filesystem::path& path,
                              std::size_t line_no, const std::string& msg) {
  fail(ErrorCode::kData,
       path.string() + ":" + std::to_string(line_no) + ": " + msg);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// Interns names in first-appearance order.
class Interner {
 public:
  std::uint32_t intern(std::string_view name) {
    auto [it, inserted] =
        index_.try_emplace(std::string(name), static_cast<std::uint32_t>(names_.size()));
    if (inserted) names_.emplace_back(name);
    return it->second;
  }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::string> names_;
};

}  // namespace

std::string Vocabulary::entity_name(EntityId id) const {
  const auto u = users.size();
  const auto i = items.size();
  if (id < u) return users[id];
  if (id < u + i) return items[id - u];
  if (id < u + i + entities.size()) return entities[id - u - i];
  return "#" + std::to_string(id);
}

KnowledgeGraph::KnowledgeGraph(Vocabulary vocab, std::vector<Triple> triples,
                               RelationId likes_relation)
    : vocab_(std::move(vocab)), triples_(std::move(triples)), likes_(likes_relation) {
  if (vocab_.relations.empty()) vocab_.relations.emplace_back("likes");
  validate();
  by_head_ = rebuilt_by_head();
  by_tail_ = rebuilt_by_tail();
}

EntityKind KnowledgeGraph::kind(EntityId e) const {
  if (is_user(e)) return EntityKind::kUser;
  if (is_item(e)) return EntityKind::kItem;
  return EntityKind::kEntity;
}

std::vector<EntityId> KnowledgeGraph::item_ids() const {
  std::vector<EntityId> out(item_count());
  for (std::uint32_t k = 0; k < item_count(); ++k) out[k] = item_begin() + k;
  return out;
}

std::vector<EntityId> KnowledgeGraph::user_ids() const {
  std::vector<EntityId> out(user_count());
  for (std::uint32_t k = 0; k < user_count(); ++k) out[k] = k;
  return out;
}

std::size_t KnowledgeGraph::side_fact_count(EntityId item) const {
  std::size_t n = 0;
  for (auto idx : by_head_[item]) n += triples_[idx].relation != likes_;
  for (auto idx : by_tail_[item]) {
    const auto& t = triples_[idx];
    // self-loops were already counted through by_head
    n += t.relation != likes_ && t.head != t.tail;
  }
  return n;
}

void KnowledgeGraph::validate() const {
  const auto n = entity_count();
  if (likes_ >= relation_count())
    fail(ErrorCode::kData, "likes relation id out of range");
  for (std::size_t k = 0; k < triples_.size(); ++k) {
    const auto& t = triples_[k];
    if (t.head >= n || t.tail >= n || t.relation >= relation_count())
      fail(ErrorCode::kData, "triple " + std::to_string(k) + " has an id out of range");
    if (t.relation == likes_) {
      if (!is_user(t.head) || !is_item(t.tail))
        fail(ErrorCode::kData, "likes triple " + std::to_string(k) +
                                   " must link a user to an item");
    } else if (is_user(t.head) || is_user(t.tail)) {
      fail(ErrorCode::kData, "side fact " + std::to_string(k) +
                                 " collides with the user namespace");
    }
  }
}

std::vector<std::vector<std::uint32_t>> KnowledgeGraph::rebuilt_by_head() const {
  std::vector<std::vector<std::uint32_t>> idx(entity_count());
  for (std::uint32_t k = 0; k < triples_.size(); ++k) idx[triples_[k].head].push_back(k);
  return idx;
}

std::vector<std::vector<std::uint32_t>> KnowledgeGraph::rebuilt_by_tail() const {
  std::vector<std::vector<std::uint32_t>> idx(entity_count());
  for (std::uint32_t k = 0; k < triples_.size(); ++k) idx[triples_[k].tail].push_back(k);
  return idx;
}

RatingsData load_ratings(const std::filesystem::path& path, double threshold) {
  if (!(threshold > 0.0 && threshold <= 5.0))
    fail(ErrorCode::kUsage, "rating threshold must lie in (0, 5]");
  auto in = open_input(path);
  Interner users, items;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim_cr(line);
    if (view.empty()) continue;
    auto fields = split_tabs(view);
    if (fields.size() != 4) parse_error(path, line_no, "expected 4 tab-separated fields");
    double rating = 0;
    if (fields[0].empty() || fields[1].empty() || !parse_number(fields[2], rating))
      parse_error(path, line_no, "malformed rating row");
    if (!(rating > threshold)) continue;
    auto u = users.intern(fields[0]);
    auto i = items.intern(fields[1]);
    if (seen.emplace(u, i).second) pairs.emplace_back(u, i);
  }
  if (pairs.empty()) fail(ErrorCode::kData, path.string() + ": no ratings above threshold");

  RatingsData out;
  out.vocab.users = users.names();
  out.vocab.items = items.names();
  out.vocab.relations = {"likes"};
  const auto num_users = static_cast<std::uint32_t>(out.vocab.users.size());
  out.likes.reserve(pairs.size());
  for (auto [u, i] : pairs) out.likes.push_back({u, 0, num_users + i});
  return out;
}

SideInfo load_kg_triples(const std::filesystem::path& triples_path,
                         const std::filesystem::path& item_map_path,
                         const Vocabulary& ratings_vocab) {
  SideInfo out;
  const auto num_users = static_cast<std::uint32_t>(ratings_vocab.users.size());
  const auto num_items = static_cast<std::uint32_t>(ratings_vocab.items.size());

  std::unordered_map<std::string, std::uint32_t> item_index;
  for (std::uint32_t k = 0; k < num_items; ++k) item_index.emplace(ratings_vocab.items[k], k);

  std::unordered_map<std::string, EntityId> entity_to_item;
  {
    auto in = open_input(item_map_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto view = trim_cr(line);
      if (view.empty()) continue;
      auto fields = split_tabs(view);
      if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
        parse_error(item_map_path, line_no, "expected item_id<TAB>entity_name");
      auto it = item_index.find(std::string(fields[0]));
      if (it == item_index.end()) {
        out.warnings.push_back(item_map_path.string() + ":" + std::to_string(line_no) +
                               ": unknown item '" + std::string(fields[0]) + "', skipped");
        continue;
      }
      auto [pos, inserted] =
          entity_to_item.try_emplace(std::string(fields[1]), num_users + it->second);
      if (!inserted)
        out.warnings.push_back(item_map_path.string() + ":" + std::to_string(line_no) +
                               ": entity '" + std::string(fields[1]) +
                               "' already mapped, skipped");
    }
  }

  Interner entities, relations;
  relations.intern("likes");
  auto resolve = [&](std::string_view name) -> EntityId {
    auto it = entity_to_item.find(std::string(name));
    if (it != entity_to_item.end()) return it->second;
    return num_users + num_items + entities.intern(name);
  };

  std::set<Triple> seen;
  auto in = open_input(triples_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim_cr(line);
    if (view.empty()) continue;
    auto fields = split_tabs(view);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty())
      parse_error(triples_path, line_no, "expected head<TAB>relation<TAB>tail");
    std::string rel(fields[1]);
    if (rel == "likes") rel = "kg:likes";
    Triple t{resolve(fields[0]), relations.intern(rel), resolve(fields[2])};
    if (seen.insert(t).second) out.triples.push_back(t);
  }
  out.entities = entities.names();
  out.relations = relations.names();
  return out;
}

KnowledgeGraph build_user_item_kg(const RatingsData& likes, const SideInfo& side_info) {
  Vocabulary vocab = likes.vocab;
  vocab.entities = side_info.entities;
  vocab.relations = side_info.relations.empty() ? std::vector<std::string>{"likes"}
                                                : side_info.relations;
  if (vocab.relations.front() != "likes")
    fail(ErrorCode::kData, "relation table must start with the likes relation");
  std::vector<Triple> triples = likes.likes;
  triples.insert(triples.end(), side_info.triples.begin(), side_info.triples.end());
  return KnowledgeGraph(std::move(vocab), std::move(triples), 0);
}

KnowledgeGraph filter_min_facts(const KnowledgeGraph& kg, std::size_t min_facts) {
  if (min_facts < 1) fail(ErrorCode::kUsage, "min_facts must be at least 1");
  const auto n = kg.entity_count();
  std::vector<char> keep(n, 0);
  bool any_item = false;
  for (EntityId e = 0; e < n; ++e) {
    if (kg.is_user(e)) {
      keep[e] = 1;
    } else if (kg.is_item(e)) {
      keep[e] = kg.side_fact_count(e) >= min_facts;
      any_item |= keep[e] != 0;
    }
  }
  if (!any_item) fail(ErrorCode::kData, "no item has at least " +
                                            std::to_string(min_facts) + " facts");

  std::vector<Triple> kept;
  for (const auto& t : kg.triples()) {
    bool drop = (kg.is_item(t.head) && !keep[t.head]) || (kg.is_item(t.tail) && !keep[t.tail]);
    if (!drop) kept.push_back(t);
  }
  for (const auto& t : kept) {
    if (kg.kind(t.head) == EntityKind::kEntity) keep[t.head] = 1;
    if (kg.kind(t.tail) == EntityKind::kEntity) keep[t.tail] = 1;
  }

  Vocabulary vocab;
  vocab.relations = kg.vocab().relations;
  std::vector<EntityId> remap(n, 0);
  EntityId next = 0;
  for (EntityId e = 0; e < n; ++e) {
    if (!keep[e]) continue;
    remap[e] = next++;
    const auto& name = kg.vocab().entity_name(e);
    switch (kg.kind(e)) {
      case EntityKind::kUser: vocab.users.push_back(name); break;
      case EntityKind::kItem: vocab.items.push_back(name); break;
      case EntityKind::kEntity: vocab.entities.push_back(name); break;
    }
  }
  for (auto& t : kept) {
    t.head = remap[t.head];
    t.tail = remap[t.tail];
  }
  return KnowledgeGraph(std::move(vocab), std::move(kept), kg.likes_relation());
}

DatasetSplit split_likes(const KnowledgeGraph& kg, double valid_frac, double test_frac,
                         std::uint64_t seed) {
  if (valid_frac < 0 || test_frac < 0 || valid_frac + test_frac >= 1.0)
    fail(ErrorCode::kUsage, "split fractions must be non-negative and sum below 1");
  DatasetSplit split;
  std::vector<std::vector<Triple>> per_user(kg.user_count());
  for (const auto& t : kg.triples()) {
    if (t.relation == kg.likes_relation())
      per_user[t.head].push_back(t);
    else
      split.train.push_back(t);
  }
  std::mt19937_64 rng(seed);
  for (auto& likes : per_user) {
    std::shuffle(likes.begin(), likes.end(), rng);
    const auto n = likes.size();
    const auto n_valid = static_cast<std::size_t>(std::floor(n * valid_frac));
    const auto n_test = static_cast<std::size_t>(std::floor(n * test_frac));
    for (std::size_t k = 0; k < n; ++k) {
      if (k < n_test)
        split.test.push_back(likes[k]);
      else if (k < n_test + n_valid)
        split.validation.push_back(likes[k]);
      else
        split.train.push_back(likes[k]);
    }
  }
  return split;
}

SyntheticSpec parse_synthetic_spec(const std::filesystem::path& path) {
  auto in = open_input(path);
  SyntheticSpec spec;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto eq = line.find('=');
    auto strip = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (strip(line).empty()) continue;
    if (eq == std::string::npos) parse_error(path, line_no, "expected key=value");
    auto key = strip(line.substr(0, eq));
    auto value = strip(line.substr(eq + 1));
    auto set_u32 = [&](std::uint32_t& field) {
      if (!parse_number(value, field)) parse_error(path, line_no, "bad integer for " + key);
    };
    auto set_f64 = [&](double& field) {
      if (!parse_number(value, field)) parse_error(path, line_no, "bad number for " + key);
    };
    if (key == "users") set_u32(spec.users);
    else if (key == "items") set_u32(spec.items);
    else if (key == "attributes") set_u32(spec.attributes);
    else if (key == "relations") set_u32(spec.relations);
    else if (key == "tail_relations") set_u32(spec.tail_relations);
    else if (key == "clusters") set_u32(spec.clusters);
    else if (key == "facts_per_item") set_u32(spec.facts_per_item);
    else if (key == "p_in") set_f64(spec.p_in);
    else if (key == "p_out") set_f64(spec.p_out);
    else if (key == "attribute_affinity") set_f64(spec.attribute_affinity);
    else if (key == "seed") {
      if (!parse_number(value, spec.seed)) parse_error(path, line_no, "bad seed");
    } else {
      parse_error(path, line_no, "unknown key '" + key + "'");
    }
  }
  return spec;
}

SyntheticData generate_synthetic_kg(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.facts_per_item < kDefaultMinFacts)
    fail(ErrorCode::kUsage, "facts_per_item must be at least 5");
  if (spec.users == 0 || spec.items == 0 || spec.clusters == 0 || spec.relations == 0 ||
      spec.attributes < spec.clusters)
    fail(ErrorCode::kUsage, "synthetic spec needs users, items, relations and "
                            "at least one attribute per cluster");
  // Distinct (relation, attribute) pairs must be reachable for every item:
  // any attribute when off-pool draws can happen, the own pool otherwise.
  const std::uint64_t reachable =
      std::uint64_t(spec.relations) *
      (spec.attribute_affinity < 1.0 ? spec.attributes : spec.attributes / spec.clusters);
  if (reachable < spec.facts_per_item)
    fail(ErrorCode::kUsage, "too few (relation, attribute) pairs for facts_per_item");
  if (spec.tail_relations > spec.relations)
    fail(ErrorCode::kUsage, "tail_relations exceeds relations");
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob_ok(spec.p_in) || !prob_ok(spec.p_out) || !prob_ok(spec.attribute_affinity))
    fail(ErrorCode::kUsage, "probabilities must lie in [0, 1]");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  auto draw = [&](std::uint32_t n) {
    return std::uniform_int_distribution<std::uint32_t>(0, n - 1)(rng);
  };

  SyntheticData out;
  Vocabulary vocab;
  for (std::uint32_t u = 0; u < spec.users; ++u) vocab.users.push_back("u" + std::to_string(u));
  for (std::uint32_t i = 0; i < spec.items; ++i) vocab.items.push_back("i" + std::to_string(i));
  for (std::uint32_t a = 0; a < spec.attributes; ++a)
    vocab.entities.push_back("a" + std::to_string(a));
  vocab.relations.push_back("likes");
  for (std::uint32_t r = 0; r < spec.relations; ++r)
    vocab.relations.push_back("rel" + std::to_string(r));

  out.user_cluster.resize(spec.users);
  out.item_cluster.resize(spec.items);
  out.attribute_cluster.resize(spec.attributes);
  for (auto& c : out.user_cluster) c = draw(spec.clusters);
  for (auto& c : out.item_cluster) c = draw(spec.clusters);
  std::vector<std::vector<std::uint32_t>> pool(spec.clusters);
  for (std::uint32_t a = 0; a < spec.attributes; ++a) {
    out.attribute_cluster[a] = a % spec.clusters;
    pool[a % spec.clusters].push_back(a);
  }

  const EntityId item0 = spec.users;
  const EntityId attr0 = spec.users + spec.items;
  std::vector<Triple> triples;
  for (std::uint32_t u = 0; u < spec.users; ++u) {
    for (std::uint32_t i = 0; i < spec.items; ++i) {
      double p = out.user_cluster[u] == out.item_cluster[i] ? spec.p_in : spec.p_out;
      if (coin(rng) < p) triples.push_back({u, 0, item0 + i});
    }
  }
  for (std::uint32_t i = 0; i < spec.items; ++i) {
    std::set<std::pair<std::uint32_t, std::uint32_t>> facts;
    while (facts.size() < spec.facts_per_item) {
      std::uint32_t rel = draw(spec.relations);
      const auto& own = pool[out.item_cluster[i]];
      std::uint32_t attr = coin(rng) < spec.attribute_affinity
                               ? own[draw(static_cast<std::uint32_t>(own.size()))]
                               : draw(spec.attributes);
      if (!facts.emplace(rel, attr).second) continue;
      if (rel < spec.tail_relations)
        triples.push_back({attr0 + attr, rel + 1, item0 + i});
      else
        triples.push_back({item0 + i, rel + 1, attr0 + attr});
    }
  }
  out.kg = KnowledgeGraph(std::move(vocab), std::move(triples), 0);
  return out;
}

Dataset make_dataset(const KnowledgeGraph& kg, DatasetSplit split) {
  std::vector<Triple> all = split.train;
  all.insert(all.end(), split.validation.begin(), split.validation.end());
  all.insert(all.end(), split.test.begin(), split.test.end());
  Dataset ds;
  ds.kg = KnowledgeGraph(kg.vocab(), std::move(all), kg.likes_relation());
  ds.split = std::move(split);
  return ds;
}

DatasetStats dataset_stats(const Dataset& ds) {
  DatasetStats s;
  const auto& kg = ds.kg;
  s.users = kg.user_count();
  s.items = kg.item_count();
  s.kg_entities = kg.entity_count() - kg.user_count() - kg.item_count();
  s.kg_relations = kg.relation_count() - 1;
  for (const auto& t : kg.triples()) {
    if (t.relation == kg.likes_relation())
      ++s.likes;
    else
      ++s.side_facts;
  }
  s.min_item_facts = kg.item_count() == 0 ? 0 : SIZE_MAX;
  for (auto i : kg.item_ids()) s.min_item_facts = std::min(s.min_item_facts, kg.side_fact_count(i));
  auto count_likes = [&](const std::vector<Triple>& v) {
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [&](const Triple& t) {
      return t.relation == kg.likes_relation();
    }));
  };
  s.train_likes = count_likes(ds.split.train);
  s.valid_likes = count_likes(ds.split.validation);
  s.test_likes = count_likes(ds.split.test);
  return s;
}

std::string format_stats_table(const DatasetStats& s) {
  std::ostringstream os;
  os << "#Users\t#Items\t#KG entities\t#KG relations\n"
     << s.users << '\t' << s.items << '\t' << s.kg_entities << '\t' << s.kg_relations << '\n'
     << "likes=" << s.likes << " (train " << s.train_likes << ", valid " << s.valid_likes
     << ", test " << s.test_likes << ") side_facts=" << s.side_facts
     << " min_item_facts=" << s.min_item_facts << '\n';
  return os.str();
}

namespace {

void write_triples(const std::filesystem::path& path, const std::vector<Triple>& triples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& t : triples) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

std::vector<Triple> read_triples(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<Triple> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim_cr(line);
    if (view.empty()) continue;
    auto f = split_tabs(view);
    Triple t;
    if (f.size() != 3 || !parse_number(f[0], t.head) || !parse_number(f[1], t.relation) ||
        !parse_number(f[2], t.tail))
      parse_error(path, line_no, "expected numeric head<TAB>relation<TAB>tail");
    out.push_back(t);
  }
  return out;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  const auto& kg = ds.kg;
  {
    std::ofstream out(dir / "entities.tsv", std::ios::binary);
    if (!out) fail(ErrorCode::kIo, "cannot write entities.tsv");
    for (EntityId e = 0; e < kg.entity_count(); ++e) {
      const char* kind = kg.is_user(e) ? "user" : kg.is_item(e) ? "item" : "entity";
      out << e << '\t' << kind << '\t' << kg.vocab().entity_name(e) << '\n';
    }
  }
  {
    std::ofstream out(dir / "relations.tsv", std::ios::binary);
    if (!out) fail(ErrorCode::kIo, "cannot write relations.tsv");
    for (RelationId r = 0; r < kg.relation_count(); ++r)
      out << r << '\t' << kg.vocab().relations[r] << '\n';
  }
  write_triples(dir / "train.tsv", ds.split.train);
  write_triples(dir / "valid.tsv", ds.split.validation);
  write_triples(dir / "test.tsv", ds.split.test);
  std::ofstream stats(dir / "stats.txt", std::ios::binary);
  stats << format_stats_table(dataset_stats(ds));
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Vocabulary vocab;
  {
    auto path = dir / "entities.tsv";
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    int stage = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto view = trim_cr(line);
      if (view.empty()) continue;
      auto f = split_tabs(view);
      EntityId id = 0;
      if (f.size() != 3 || !parse_number(f[0], id) || id != vocab.entity_count())
        parse_error(path, line_no, "expected dense id<TAB>kind<TAB>name");
      int kind = f[1] == "user" ? 0 : f[1] == "item" ? 1 : f[1] == "entity" ? 2 : -1;
      if (kind < stage) parse_error(path, line_no, "entity kinds out of order");
      stage = kind;
      (kind == 0 ? vocab.users : kind == 1 ? vocab.items : vocab.entities).emplace_back(f[2]);
    }
  }
  {
    auto path = dir / "relations.tsv";
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto view = trim_cr(line);
      if (view.empty()) continue;
      auto f = split_tabs(view);
      RelationId id = 0;
      if (f.size() != 2 || !parse_number(f[0], id) || id != vocab.relations.size())
        parse_error(path, line_no, "expected dense id<TAB>name");
      vocab.relations.emplace_back(f[1]);
    }
  }
  DatasetSplit split;
  split.train = read_triples(dir / "train.tsv");
  split.validation = read_triples(dir / "valid.tsv");
  split.test = read_triples(dir / "test.tsv");
  return make_dataset(KnowledgeGraph(std::move(vocab), {}, 0), std::move(split));
}

}  // namespace bcie
