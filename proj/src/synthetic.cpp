#include "docforge/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>

#include "docforge/error.hpp"
#include "docforge/rng.hpp"

namespace docforge {

namespace {

const std::vector<std::string>& lexicon() {
    static const std::vector<std::string> words = {
        "invoice",   "total",    "amount",  "due",      "date",     "account",  "number",   "payment",
        "balance",   "statement", "form",   "applicant", "name",    "address",  "city",     "state",
        "zip",       "signature", "agreement", "terms",  "policy",   "insurance", "claim",   "coverage",
        "premium",   "holder",   "issued",  "expires",  "license",  "vehicle",  "driver",   "employer",
        "income",    "tax",      "year",    "period",   "gross",    "net",      "deduction", "withholding",
        "benefits",  "enrollment", "member", "provider", "service", "charge",   "fee",      "subtotal",
        "quantity",  "item",     "description", "unit", "price",    "paid",     "billing",  "shipping",
        "order",     "receipt",  "reference", "transaction", "approved", "authorized", "certificate",
        "registration", "renewal", "notice", "request",  "application", "submitted", "received",
        "effective", "schedule", "section", "attached", "document", "page",     "contact",  "phone",
        "email",     "office",   "department", "court",  "county",   "witness",  "notary",   "deed",
        "lease",     "tenant",   "landlord", "property", "monthly",  "annual",   "rate",     "interest",
        "principal", "escrow",   "lender",  "borrower", "loan",     "mortgage", "summary",  "report",
    };
    return words;
}

const std::vector<std::string>& given_pool() {
    static const std::vector<std::string> names = {"John", "Mary", "Robert", "Linda", "Michael",
                                                   "Sarah", "David", "Karen", "James", "Susan"};
    return names;
}

const std::vector<std::string>& family_pool() {
    static const std::vector<std::string> names = {"Smith", "Johnson", "Brown", "Davis", "Wilson",
                                                   "Taylor", "Moore", "Clark", "Lewis", "Walker"};
    return names;
}

const std::vector<std::string>& street_pool() {
    static const std::vector<std::string> streets = {"Main Street", "Oak Avenue", "Maple Road",
                                                     "Cedar Lane", "Park Drive", "Elm Court"};
    return streets;
}

const std::vector<std::string>& month_pool() {
    static const std::vector<std::string> months = {"January", "February", "March",     "April",
                                                    "May",     "June",     "July",      "August",
                                                    "September", "October", "November", "December"};
    return months;
}

std::string pick(Rng& rng, const std::vector<std::string>& from) {
    return from[static_cast<std::size_t>(rng.below(from.size()))];
}

/// Emit the next segment as whitespace-separated words.
std::vector<std::string> synth_segment(Rng& rng) {
    const std::uint64_t kind = rng.below(24);
    if (kind == 0) {
        std::string user = pick(rng, given_pool());
        std::transform(user.begin(), user.end(), user.begin(), [](unsigned char c) { return std::tolower(c); });
        return {user + std::to_string(rng.below(100)) + "@" +
                std::vector<std::string>{"example.com", "mail.org", "corp.net"}[rng.below(3)]};
    }
    if (kind == 1) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "$%llu.%02llu",
                      static_cast<unsigned long long>(rng.below(9000) + 1),
                      static_cast<unsigned long long>(rng.below(100)));
        return {buf};
    }
    if (kind == 2) {
        return {pick(rng, month_pool()), std::to_string(rng.below(28) + 1) + ",",
                std::to_string(2015 + rng.below(10))};
    }
    if (kind == 3) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "(%03llu) %03llu-%04llu",
                      static_cast<unsigned long long>(rng.below(800) + 200),
                      static_cast<unsigned long long>(rng.below(1000)),
                      static_cast<unsigned long long>(rng.below(10000)));
        std::vector<std::string> out;
        const std::string s = buf;
        std::size_t sp = s.find(' ');
        out.push_back(s.substr(0, sp));
        out.push_back(s.substr(sp + 1));
        return out;
    }
    if (kind == 4) {
        return {pick(rng, given_pool()), pick(rng, family_pool())};
    }
    if (kind == 5) {
        std::vector<std::string> out = {std::to_string(rng.below(9000) + 100)};
        const std::string street = pick(rng, street_pool());
        std::size_t at = 0;
        while (at < street.size()) {
            const std::size_t sp = street.find(' ', at);
            if (sp == std::string::npos) {
                out.push_back(street.substr(at));
                break;
            }
            out.push_back(street.substr(at, sp - at));
            at = sp + 1;
        }
        return out;
    }
    // plain words
    std::vector<std::string> out;
    const std::size_t count = 1 + static_cast<std::size_t>(rng.below(3));
    for (std::size_t i = 0; i < count; ++i) {
        std::string w = pick(rng, lexicon());
        if (rng.below(8) == 0) {
            w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        }
        if (rng.below(10) == 0) {
            w += ":";
        }
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace

VectorStore synth_store(std::size_t n, int dimension, std::uint64_t seed, double dup_fraction) {
    if (n == 0 || dimension <= 0) {
        throw InvalidInput("synth_store: need n >= 1 and a positive dimension");
    }
    Rng rng(splitmix64(seed) ^ 0x5374307265ull);  // "Store"
    Matrix vectors(n, dimension);
    std::vector<std::uint64_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        ids[i] = i;
        if (i > 0 && rng.uniform() < dup_fraction) {
            const std::size_t src = static_cast<std::size_t>(rng.below(i));
            vectors.row(static_cast<Eigen::Index>(i)) = vectors.row(static_cast<Eigen::Index>(src));
            continue;
        }
        Vector v(dimension);
        for (int d = 0; d < dimension; ++d) {
            v[d] = rng.gaussian();
        }
        vectors.row(static_cast<Eigen::Index>(i)) = UnitVector::normalized(std::move(v)).values.transpose();
    }
    return VectorStore(std::move(ids), std::move(vectors));
}

std::string synth_doc_id(std::uint64_t image_id) {
    return "doc-" + std::to_string(image_id);
}

OcrDocument synth_ocr_document(std::uint64_t image_id, std::uint64_t seed) {
    Rng rng(splitmix64(seed ^ 0x0c12d0c5ull) ^ splitmix64(image_id));
    OcrDocument doc;
    doc.doc_id = synth_doc_id(image_id);
    doc.page_width = 700.0 + static_cast<double>(rng.below(4)) * 72.0;
    doc.page_height = 900.0 + static_cast<double>(rng.below(4)) * 72.0;

    const std::uint64_t quality = rng.below(25);
    // 0 => low confidence, 1 => tiny, 2 => punctuation soup, else normal
    double conf_lo = 0.75;
    double conf_hi = 0.99;
    std::size_t target_words = 60 + static_cast<std::size_t>(rng.below(120));
    bool punct_soup = false;
    if (quality == 0) {
        conf_lo = 0.2;
        conf_hi = 0.5;
    } else if (quality == 1) {
        target_words = 3 + static_cast<std::size_t>(rng.below(6));
    } else if (quality == 2) {
        punct_soup = true;
    }

    const double margin = 48.0;
    const double char_w = 9.0;
    const double line_h = 24.0;
    const double glyph_h = 14.0;
    double x = margin;
    double y = margin;

    std::vector<std::string> pending;
    while (doc.words.size() < target_words && y + line_h < doc.page_height - margin) {
        if (pending.empty()) {
            if (punct_soup && rng.below(4) != 0) {
                static const std::vector<std::string> soup = {"###", "?!;", "%%%", "+++", "~~~", "==="};
                pending.push_back(pick(rng, soup));
            } else {
                pending = synth_segment(rng);
            }
        }
        const std::string word = pending.front();
        pending.erase(pending.begin());
        const auto glyphs = utf8_codepoints(word);
        const double width = char_w * static_cast<double>(glyphs.size());
        if (x + width > doc.page_width - margin) {
            x = margin;
            y += line_h;
            if (y + line_h >= doc.page_height - margin) {
                break;
            }
        }
        const double confidence = conf_lo + (conf_hi - conf_lo) * rng.uniform();
        WordRange range{doc.chars.size(), 0};
        for (std::size_t g = 0; g < glyphs.size(); ++g) {
            OcrChar ch;
            ch.glyph = glyphs[g];
            ch.box = Box{x + char_w * static_cast<double>(g), y,
                         x + char_w * static_cast<double>(g + 1), y + glyph_h};
            ch.confidence = confidence;
            doc.chars.push_back(std::move(ch));
        }
        range.end = doc.chars.size();
        doc.words.push_back(range);
        x += width + char_w;
    }
    return doc;
}

Image render_document(const OcrDocument& ocr) {
    Image img = Image::filled(static_cast<int>(ocr.page_width), static_cast<int>(ocr.page_height),
                              255, 255, 255);
    for (const auto& ch : ocr.chars) {
        // darker ink for confident glyphs, light gray for noisy ones
        const auto shade = static_cast<std::uint8_t>(30 + (1.0 - ch.confidence) * 150.0);
        img.fill_rect(ch.box, shade, shade, shade);
    }
    return img;
}

std::vector<std::string> synth_vocab_lines() {
    std::set<std::string> full_words;
    auto add_word = [&](const std::string& w) {
        full_words.insert(w);
        std::string lower = w;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        full_words.insert(lower);
        std::string cap = lower;
        cap[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(cap[0])));
        full_words.insert(cap);
    };
    for (const auto& w : lexicon()) {
        add_word(w);
    }
    for (const auto& w : given_pool()) {
        add_word(w);
    }
    for (const auto& w : family_pool()) {
        add_word(w);
    }
    for (const auto& w : month_pool()) {
        add_word(w);
    }

    std::vector<std::string> lines = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
    for (const auto& w : full_words) {
        lines.push_back(w);
    }
    std::string singles = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    singles += "$.,:;()-@#%?!+~=/";
    for (const char c : singles) {
        lines.push_back(std::string(1, c));
        lines.push_back("##" + std::string(1, c));
    }
    return lines;
}

JsonlOcrProvider::JsonlOcrProvider(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open OCR file: " + path);
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        docs_.push_back(parse_ocr_json_text(line));
        by_doc_id_.emplace(docs_.back().doc_id, docs_.size() - 1);
    }
}

std::optional<OcrDocument> JsonlOcrProvider::ocr_for(std::uint64_t image_id) const {
    auto it = by_doc_id_.find(synth_doc_id(image_id));
    if (it == by_doc_id_.end()) {
        it = by_doc_id_.find(std::to_string(image_id));  // bare numeric doc ids
    }
    if (it == by_doc_id_.end()) {
        return std::nullopt;
    }
    return docs_[it->second];
}

EntityCorpus synth_entity_corpus(std::size_t num_docs, std::size_t num_types, std::uint64_t seed) {
    if (num_types == 0) {
        throw InvalidInput("synth_entity_corpus: need at least one type");
    }
    Rng rng(splitmix64(seed) ^ 0xfe35407ull);
    EntityCorpus corpus;
    for (std::size_t i = 0; i < num_docs; ++i) {
        EntityDoc doc;
        doc.doc_id = synth_doc_id(i);
        doc.length = 20 + static_cast<std::size_t>(rng.below(41));
        const std::size_t span_count = 1 + static_cast<std::size_t>(rng.below(4));
        std::set<std::size_t> taken;
        for (std::size_t s = 0; s < span_count; ++s) {
            const std::size_t len = 1 + static_cast<std::size_t>(rng.below(3));
            const std::size_t start = static_cast<std::size_t>(rng.below(doc.length - len + 1));
            bool clash = false;
            for (std::size_t t = start; t < start + len; ++t) {
                if (taken.count(t) > 0) {
                    clash = true;
                }
            }
            if (clash) {
                continue;
            }
            for (std::size_t t = start; t < start + len; ++t) {
                taken.insert(t);
            }
            char buf[32];
            std::snprintf(buf, sizeof(buf), "type_%02llu",
                          static_cast<unsigned long long>(rng.below(num_types)));
            doc.spans.push_back({buf, start, start + len - 1});
        }
        std::sort(doc.spans.begin(), doc.spans.end(),
                  [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
        corpus.docs.push_back(std::move(doc));
    }
    return corpus;
}

}  // namespace docforge
