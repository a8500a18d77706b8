#include "newsrace/channel.hpp"

#include <algorithm>
#include <stdexcept>

namespace newsrace {

ChannelSet ChannelSet::with_extras(const std::string& extra1,
                                   const std::string& extra2) {
  std::vector<std::string> names = {
      channels::kTwitter,        channels::kNews,
      channels::kBluesky,        channels::kFacebookPublic,
      channels::kYoutube,        channels::kInstagramPublic,
      channels::kForum,          extra1,
      extra2};
  for (const auto& n : names) {
    if (n.empty()) throw std::invalid_argument("empty channel label");
  }
  auto sorted = names;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("duplicate channel label");
  }
  return ChannelSet(std::move(names));
}

ChannelSet ChannelSet::defaults() { return with_extras("reddit", "blog"); }

bool ChannelSet::contains(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

}  // namespace newsrace
