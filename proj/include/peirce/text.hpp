#pragma once
// Text normalisation shared by retrieval and the soft critiques: tokenisation,
// Porter stemming, stopword filtering, sentence splitting and concept sets.

#include <string>
#include <set>
#include <vector>

namespace peirce::text {

// Lowercase, split on non-alphanumeric. min_len filters short tokens
// (retrieval uses 2, concept extraction keeps everything).
std::vector<std::string> tokenize(const std::string& s, size_t min_len = 2);

// Classic Porter stemmer. Input must already be lowercase.
std::string porter_stem(const std::string& word);

// Split into sentences on ./!/? followed by whitespace or end of text.
// Trailing/leading whitespace trimmed; empty sentences dropped.
std::vector<std::string> split_sentences(const std::string& s);

const std::set<std::string>& default_stopwords();

// lowercase -> strip punctuation -> drop stopwords -> stem -> dedupe.
std::set<std::string> concept_set(const std::string& s,
                                  const std::set<std::string>& stopwords = default_stopwords());

// |a ∩ b| / |a ∪ b|; two empty sets are identical, so 1.0.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

}  // namespace peirce::text
