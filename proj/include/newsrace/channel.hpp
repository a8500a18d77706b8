#pragma once

#include <string>
#include <vector>

namespace newsrace {

namespace channels {
inline constexpr const char* kTwitter = "twitter";
inline constexpr const char* kNews = "news";
inline constexpr const char* kBluesky = "bluesky";
inline constexpr const char* kFacebookPublic = "facebook_public";
inline constexpr const char* kYoutube = "youtube";
inline constexpr const char* kInstagramPublic = "instagram_public";
inline constexpr const char* kForum = "forum";
}  // namespace channels

// The provider indexes nine channels: seven fixed labels plus two extras
// that are configuration entries. The set is fixed for the duration of a
// run; twitter and news are always members.
class ChannelSet {
 public:
  // Throws std::invalid_argument on empty or duplicate labels.
  static ChannelSet with_extras(const std::string& extra1,
                                const std::string& extra2);
  // Extras default to "reddit" and "blog".
  static ChannelSet defaults();

  const std::vector<std::string>& names() const { return names_; }
  bool contains(const std::string& name) const;
  size_t size() const { return names_.size(); }

 private:
  explicit ChannelSet(std::vector<std::string> names)
      : names_(std::move(names)) {}
  std::vector<std::string> names_;
};

}  // namespace newsrace
