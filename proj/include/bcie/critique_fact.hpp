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


#ifndef BCIE_CRITIQUE_FACT_HPP
#define BCIE_CRITIQUE_FACT_HPP

#include <optional>
#include <string>
#include <tuple>

#include "bcie/kg_data.hpp"

namespace bcie {

enum class ItemSide { kHead, kTail };

// A KG fact with the item slot left open: (item, relation, anchor) when the
// item is the head, (anchor, relation, item) when it is the tail.
struct CritiqueFact {
  RelationId relation = 0;
  EntityId anchor = 0;
  ItemSide item_side = ItemSide::kHead;
  std::optional<EntityId> source_item;

  auto key() const { return std::make_tuple(relation, anchor, item_side); }

  // Identity ignores the provenance item.
  friend bool operator==(const CritiqueFact& a, const CritiqueFact& b) { return a.key() == b.key(); }
  friend bool operator<(const CritiqueFact& a, const CritiqueFact& b) { return a.key() < b.key(); }

  Triple instantiate(EntityId item) const {
    return item_side == ItemSide::kHead ? Triple{item, relation, anchor}
                                        : Triple{anchor, relation, item};
  }
};

// Stable textual id, "<relation>:<anchor>:<h|t>".
std::string fact_id(const CritiqueFact& f);
std::optional<CritiqueFact> parse_fact_id(const std::string& id);

inline const char* side_name(ItemSide s) { return s == ItemSide::kHead ? "head" : "tail"; }

}  // namespace bcie

#endif  // BCIE_CRITIQUE_FACT_HPP
