#pragma once

#include <string>
#include <vector>

namespace newsrace::text {

std::string to_lower(const std::string& s);

// Case-insensitive substring test (ASCII folding).
bool contains_ci(const std::string& haystack, const std::string& needle);

// Case-sensitive substring test.
bool contains_cs(const std::string& haystack, const std::string& needle);

// Lowercased alphanumeric word runs; punctuation splits tokens.
std::vector<std::string> tokenize(const std::string& s);

// Normalized form of a term for keyword matching: case-folded tokens
// re-joined with single spaces ("U.S. Senate" -> "u s senate"). Idempotent.
std::string normalize_term(const std::string& term);

// Whole-word match of a normalized term against tokenized text. Multiword
// terms match as contiguous token sequences.
bool term_matches(const std::vector<std::string>& tokens,
                  const std::string& normalized_term);

bool is_stopword(const std::string& lower_word);

// Decodes the handful of named HTML entities plus numeric character
// references; non-ASCII code points are emitted as UTF-8.
std::string decode_entities(const std::string& s);

// Drops tags, keeps text nodes, decodes entities, collapses whitespace.
// <script> and <style> bodies are discarded.
std::string strip_html(const std::string& s);

}  // namespace newsrace::text
