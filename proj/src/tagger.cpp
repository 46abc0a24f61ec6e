#include "docforge/tagger.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <unordered_set>

#include "docforge/error.hpp"

namespace docforge {

namespace {

const std::unordered_set<std::string>& given_names() {
    static const std::unordered_set<std::string> names = {
        "James", "John", "Robert", "Michael", "William", "David", "Richard", "Joseph", "Thomas",
        "Charles", "Christopher", "Daniel", "Matthew", "Anthony", "Mark", "Donald", "Steven",
        "Paul", "Andrew", "Joshua", "Kenneth", "Kevin", "Brian", "George", "Timothy", "Ronald",
        "Edward", "Jason", "Jeffrey", "Ryan", "Jacob", "Gary", "Nicholas", "Eric", "Jonathan",
        "Stephen", "Larry", "Justin", "Scott", "Brandon", "Benjamin", "Samuel", "Gregory",
        "Alexander", "Patrick", "Frank", "Raymond", "Jack", "Dennis", "Jerry", "Tyler", "Aaron",
        "Mary", "Patricia", "Jennifer", "Linda", "Elizabeth", "Barbara", "Susan", "Jessica",
        "Sarah", "Karen", "Lisa", "Nancy", "Betty", "Margaret", "Sandra", "Ashley", "Kimberly",
        "Emily", "Donna", "Michelle", "Carol", "Amanda", "Dorothy", "Melissa", "Deborah",
        "Stephanie", "Rebecca", "Sharon", "Laura", "Cynthia", "Kathleen", "Amy", "Angela",
        "Shirley", "Anna", "Brenda", "Pamela", "Emma", "Nicole", "Helen", "Samantha", "Katherine",
        "Christine", "Debra", "Rachel", "Carolyn", "Janet", "Catherine", "Maria", "Heather",
        "Diane", "Ruth", "Julie", "Olivia", "Joyce", "Virginia", "Victoria", "Kelly", "Lauren",
        "Christina", "Joan", "Evelyn", "Judith", "Megan", "Andrea", "Cheryl", "Hannah", "Jacqueline",
        "Martha", "Gloria", "Teresa", "Ann", "Sara", "Madison", "Frances", "Kathryn", "Janice",
        "Jean", "Abigail", "Alice", "Julia", "Judy", "Sophia", "Grace", "Denise", "Amber",
    };
    return names;
}

const std::unordered_set<std::string>& family_names() {
    static const std::unordered_set<std::string> names = {
        "Smith", "Johnson", "Williams", "Brown", "Jones", "Garcia", "Miller", "Davis", "Rodriguez",
        "Martinez", "Hernandez", "Lopez", "Gonzalez", "Wilson", "Anderson", "Thomas", "Taylor",
        "Moore", "Jackson", "Martin", "Lee", "Perez", "Thompson", "White", "Harris", "Sanchez",
        "Clark", "Ramirez", "Lewis", "Robinson", "Walker", "Young", "Allen", "King", "Wright",
        "Scott", "Torres", "Nguyen", "Hill", "Flores", "Green", "Adams", "Nelson", "Baker",
        "Hall", "Rivera", "Campbell", "Mitchell", "Carter", "Roberts", "Gomez", "Phillips",
        "Evans", "Turner", "Diaz", "Parker", "Cruz", "Edwards", "Collins", "Reyes", "Stewart",
        "Morris", "Morales", "Murphy", "Cook", "Rogers", "Gutierrez", "Ortiz", "Morgan", "Cooper",
        "Peterson", "Bailey", "Reed", "Kelly", "Howard", "Ramos", "Kim", "Cox", "Ward",
        "Richardson", "Watson", "Brooks", "Chavez", "Wood", "James", "Bennett", "Gray", "Mendoza",
        "Ruiz", "Hughes", "Price", "Alvarez", "Castillo", "Sanders", "Patel", "Myers", "Long",
        "Ross", "Foster", "Jimenez", "Powell", "Jenkins", "Perry", "Russell", "Sullivan", "Bell",
        "Coleman", "Butler", "Henderson", "Barnes", "Gonzales", "Fisher", "Vasquez", "Simmons",
        "Romero", "Jordan", "Patterson", "Alexander", "Hamilton", "Graham", "Reynolds", "Griffin",
        "Wallace", "Moreno", "West", "Cole", "Hayes", "Bryant", "Herrera", "Gibson", "Ellis",
    };
    return names;
}

struct Rule {
    TagClass cls;
    std::regex pattern;
};

const std::vector<Rule>& regex_rules() {
    static const std::vector<Rule> rules = [] {
        std::vector<Rule> r;
        r.push_back({TagClass::email,
                     std::regex(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(\.[A-Za-z]{2,})+)")});
        r.push_back({TagClass::price,
                     std::regex(R"(\$ ?\d{1,3}(,\d{3})*(\.\d{1,2})?|\b\d+(\.\d{1,2})? ?(USD|EUR|GBP|dollars)\b)")});
        const std::string month =
            R"((Jan(uary)?|Feb(ruary)?|Mar(ch)?|Apr(il)?|May|Jun(e)?|Jul(y)?|Aug(ust)?|Sep(t(ember)?)?|Oct(ober)?|Nov(ember)?|Dec(ember)?))";
        r.push_back({TagClass::date,
                     std::regex(month + R"(\.? \d{1,2}(st|nd|rd|th)?(,| ) ?\d{4})" + "|" +
                                R"(\b\d{1,2} )" + month + R"( \d{4})" + "|" +
                                R"(\b\d{4}-\d{2}-\d{2}\b|\b\d{1,2}/\d{1,2}/\d{2,4}\b)")});
        r.push_back({TagClass::phone,
                     std::regex(R"(\(\d{3}\) ?\d{3}[- ]\d{4}|\b\d{3}[-.]\d{3}[-.]\d{4}\b|\+1[ -]?\d{3}[ -]?\d{3}[ -]?\d{4})")});
        r.push_back({TagClass::mail_address,
                     std::regex(R"(\b\d{1,5} ([A-Z][A-Za-z]+ )+(Street|St|Avenue|Ave|Road|Rd|Boulevard|Blvd|Lane|Ln|Drive|Dr|Court|Ct|Place|Pl|Way)\b\.?(, [A-Z][A-Za-z]+(, [A-Z]{2})?( \d{5})?)?)")});
        return r;
    }();
    return rules;
}

struct WordToken {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string stripped;  // leading/trailing punctuation removed
    bool capitalized = false;
};

std::vector<WordToken> split_words(const std::string& text) {
    std::vector<WordToken> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
        }
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) {
            ++j;
        }
        if (j > i) {
            WordToken w;
            w.begin = i;
            w.end = j;
            std::size_t a = i;
            std::size_t b = j;
            while (a < b && std::ispunct(static_cast<unsigned char>(text[a]))) {
                ++a;
            }
            while (b > a && std::ispunct(static_cast<unsigned char>(text[b - 1]))) {
                --b;
            }
            w.stripped = text.substr(a, b - a);
            w.capitalized = !w.stripped.empty() && std::isupper(static_cast<unsigned char>(w.stripped[0]));
            out.push_back(std::move(w));
        }
        i = j;
    }
    return out;
}

bool is_honorific(const std::string& s) {
    return s == "Mr" || s == "Mrs" || s == "Ms" || s == "Dr" || s == "Prof";
}

void tag_person_names(const std::string& text, std::vector<TagSpan>* out) {
    const auto words = split_words(text);
    for (std::size_t i = 0; i + 1 < words.size(); ++i) {
        const auto& w = words[i];
        const auto& next = words[i + 1];
        if (is_honorific(w.stripped) && next.capitalized && next.stripped.size() > 1) {
            std::size_t end = next.end;
            if (i + 2 < words.size() && words[i + 2].capitalized &&
                family_names().count(words[i + 2].stripped) > 0) {
                end = words[i + 2].end;
            }
            out->push_back({TagClass::person_name, next.begin, end});
            continue;
        }
        if (w.capitalized && given_names().count(w.stripped) > 0 && next.capitalized &&
            family_names().count(next.stripped) > 0) {
            out->push_back({TagClass::person_name, w.begin, next.end});
        }
    }
}

void merge_same_class(std::vector<TagSpan>* spans) {
    std::sort(spans->begin(), spans->end(), [](const TagSpan& a, const TagSpan& b) {
        if (a.begin != b.begin) return a.begin < b.begin;
        if (a.cls != b.cls) return a.cls < b.cls;
        return a.end < b.end;
    });
    std::vector<TagSpan> merged;
    for (const auto& s : *spans) {
        bool absorbed = false;
        for (auto& m : merged) {
            if (m.cls == s.cls && s.begin <= m.end && m.begin <= s.end) {
                m.begin = std::min(m.begin, s.begin);
                m.end = std::max(m.end, s.end);
                absorbed = true;
                break;
            }
        }
        if (!absorbed) {
            merged.push_back(s);
        }
    }
    std::sort(merged.begin(), merged.end(), [](const TagSpan& a, const TagSpan& b) {
        if (a.begin != b.begin) return a.begin < b.begin;
        return a.cls < b.cls;
    });
    *spans = std::move(merged);
}

}  // namespace

const char* tag_class_name(TagClass cls) {
    switch (cls) {
        case TagClass::email: return "email";
        case TagClass::mail_address: return "mail_address";
        case TagClass::price: return "price";
        case TagClass::date: return "date";
        case TagClass::phone: return "phone";
        case TagClass::person_name: return "person_name";
    }
    return "unknown";
}

TagClass tag_class_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kNumTagClasses; ++i) {
        if (name == tag_class_name(static_cast<TagClass>(i))) {
            return static_cast<TagClass>(i);
        }
    }
    throw InvalidInput("unknown tag class '" + name + "'");
}

std::vector<TagSpan> weak_tag(const std::string& text) {
    std::vector<TagSpan> spans;
    for (const auto& rule : regex_rules()) {
        for (auto it = std::sregex_iterator(text.begin(), text.end(), rule.pattern);
             it != std::sregex_iterator(); ++it) {
            spans.push_back({rule.cls, static_cast<std::size_t>(it->position()),
                             static_cast<std::size_t>(it->position() + it->length())});
        }
    }
    tag_person_names(text, &spans);
    merge_same_class(&spans);
    return spans;
}

std::vector<TokenTags> project_tags(std::span<const TagSpan> spans,
                                    std::span<const std::pair<std::size_t, std::size_t>> token_ranges) {
    std::vector<TokenTags> out(token_ranges.size(), TokenTags{});
    for (std::size_t i = 0; i < token_ranges.size(); ++i) {
        const auto [begin, end] = token_ranges[i];
        for (const auto& span : spans) {
            if (begin < span.end && span.begin < end) {
                out[i][static_cast<std::size_t>(span.cls)] = 1;
            }
        }
    }
    return out;
}

}  // namespace docforge
