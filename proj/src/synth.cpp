#include "linkmine/synth.hpp"

#include <array>
#include <stdexcept>
#include <vector>

#include "linkmine/classify.hpp"
#include "linkmine/util.hpp"

namespace linkmine {

namespace {

struct Theme {
    const char* name;
    std::array<const char*, 6> titles;
    std::array<const char*, 4> companies;
    // Distinctive content words, each at least five characters and absent
    // from the stop-word list, so they survive the text pipeline and give
    // the corpus recoverable cluster structure.
    std::array<const char*, 8> terms;
    std::array<const char*, 5> fields;
};

constexpr std::array<Theme, 6> kThemes{{
    {"software",
     {"Software Engineer", "Backend Developer", "Platform Architect",
      "Site Reliability Engineer", "Mobile Developer", "Engineering Manager"},
     {"Nimbus Analytics", "Quanta Systems", "Bluegrid Labs", "Vectorworks"},
     {"microservices", "kubernetes", "distributed", "latency", "deployment",
      "observability", "refactoring", "databases"},
     {"computer science", "software engineering", "information systems",
      "applied mathematics", "data engineering"}},
    {"biotech",
     {"Research Scientist", "Lab Manager", "Clinical Research Associate",
      "Bioinformatics Analyst", "Process Engineer", "Quality Specialist"},
     {"Helixium", "Novagene Therapeutics", "Crestline Biosciences",
      "Meridian Pharma"},
     {"genomics", "sequencing", "clinical", "assays", "proteins", "enzymes",
      "vaccines", "laboratory"},
     {"molecular biology", "biochemistry", "genetics", "pharmacology",
      "bioinformatics"}},
    {"finance",
     {"Financial Analyst", "Portfolio Manager", "Risk Officer",
      "Investment Associate", "Treasury Specialist", "Audit Manager"},
     {"Sterling Mutual", "Harborview Capital", "Crescent Funds",
      "Atlas Clearing"},
     {"portfolio", "derivatives", "hedging", "liquidity", "valuation",
      "equities", "compliance", "forecasting"},
     {"economics", "corporate finance", "accounting", "statistics",
      "risk management"}},
    {"legal",
     {"Corporate Counsel", "Paralegal", "Contract Manager", "Legal Advisor",
      "Claims Specialist", "Policy Analyst"},
     {"Whitfield and Barrow", "Lexum Partners", "Calder Law Group",
      "Brightstone Advisory"},
     {"litigation", "contracts", "arbitration", "regulatory", "negotiations",
      "statutes", "counsel", "drafting"},
     {"international law", "commercial law", "political science",
      "public policy", "criminology"}},
    {"energy",
     {"Field Engineer", "Grid Operations Manager", "Maintenance Planner",
      "HSE Coordinator", "Project Engineer", "Turbine Specialist"},
     {"Meridian Grid", "Halcyon Power", "Boreal Wind Partners",
      "Stratum Drilling"},
     {"turbines", "photovoltaic", "substation", "drilling", "refinery",
      "emissions", "voltage", "megawatt"},
     {"electrical engineering", "renewable energy", "mechanical engineering",
      "chemical engineering", "environmental science"}},
    {"logistics",
     {"Supply Chain Planner", "Warehouse Supervisor", "Fleet Coordinator",
      "Procurement Specialist", "Customs Broker", "Distribution Manager"},
     {"Transcona Freight", "Portside Logistics", "Cartwheel Express",
      "Northlane Shipping"},
     {"freight", "warehousing", "inventory", "shipments", "customs",
      "routing", "pallets", "forwarding"},
     {"supply chain management", "operations research",
      "industrial engineering", "transport economics",
      "business administration"}},
}};

// %J job title, %C company, %T theme term, %F field of study, %N number.
constexpr std::array<const char*, 4> kPositionTemplates{
    "I am currently a %J at %C.",
    "Working as a %J at %C since %N.",
    "%J at %C, where I lead much of our work on %T.",
    "After several years as a %J, I moved to %C to take on more "
    "responsibility.",
};

constexpr std::array<const char*, 6> kSummaryTemplates{
    "I have spent several years working on %T and %T for customers in many "
    "countries.",
    "My recent projects focused on %T together with large scale %T.",
    "Over the last decade I have built deep experience with %T and with %T "
    "in production settings.",
    "I enjoy mentoring colleagues and sharing what I know about %T and %T.",
    "Before that I was responsible for %T and helped the team improve %T.",
    "Day to day I spend most of my time on %T, %T and related problems.",
};

// One template set per education level; every expansion of a level's
// templates contains at least one keyword of that level and none from any
// other level, which the generator tests verify by classifying the output.
constexpr std::array<const char*, 4> kPhdTemplates{
    "Ph.D. in %F", "PhD, %F", "Doctoral studies, %F", "Postdoc, %F"};
constexpr std::array<const char*, 5> kMasterTemplates{
    "Master of Science in %F", "MSc, %F", "MBA", "Master's degree in %F",
    "Postgraduate diploma, %F"};
constexpr std::array<const char*, 5> kBachelorTemplates{
    "Bachelor of Science in %F", "BSc, %F", "B.Sc. in %F",
    "Undergraduate degree in %F", "BBA"};
constexpr std::array<const char*, 5> kSecondaryTemplates{
    "Secondary school diploma", "GCSE examinations", "HSC certificate",
    "International baccalaureate", "IGCSE"};
constexpr std::array<const char*, 5> kOtherTemplates{
    "Certificate in %F", "Vocational training, %F", "Apprenticeship in %F",
    "Professional development program, %F", "Evening courses in %F"};

// Zero English stop-word hits in each of these, so the stop-word ratio is
// exactly zero and the profile falls under any valid threshold.
constexpr std::array<const char*, 4> kForeignPositions{
    "Directeur commercial, responsable des ventes internationales",
    "Leitender Entwickler, verantwortlich für mehrere Produktlinien",
    "Gerente de operaciones, responsable del área logística",
    "Responsabile della produzione presso un'azienda manifatturiera",
};

constexpr std::array<const char*, 4> kForeignSummaries{
    "Longue expérience du développement logiciel et des projets "
    "internationaux.",
    "Langjährige Erfahrung mit verteilten Systemen und relationalen "
    "Datenbanken.",
    "Amplia experiencia gestionando equipos multidisciplinares y proyectos "
    "complejos.",
    "Esperienza pluriennale nella gestione di progetti industriali "
    "complessi.",
};

constexpr std::array<const char*, 4> kForeignDegrees{
    "Maîtrise en informatique",
    "Diplôme d'ingénieur",
    "Staatsexamen Rechtswissenschaft",
    "Técnico superior en administración",
};

template <std::size_t N>
const char* pick(const std::array<const char*, N>& pool, Rng& rng) {
    return pool[rng.next_index(N)];
}

std::string expand(const char* tmpl, const Theme& theme, Rng& rng) {
    std::string out;
    for (const char* p = tmpl; *p != '\0'; ++p) {
        if (*p != '%') {
            out.push_back(*p);
            continue;
        }
        ++p;
        switch (*p) {
            case 'J': out += pick(theme.titles, rng); break;
            case 'C': out += pick(theme.companies, rng); break;
            case 'T': out += pick(theme.terms, rng); break;
            case 'F': out += pick(theme.fields, rng); break;
            case 'N': out += std::to_string(2005 + rng.next_index(18)); break;
            default: throw std::logic_error("synth: bad template code");
        }
    }
    return out;
}

EducationLevel sample_level(Rng& rng) {
    const double r = rng.next_double();
    if (r < 0.10) return EducationLevel::PhD;
    if (r < 0.32) return EducationLevel::Master;
    if (r < 0.62) return EducationLevel::Bachelor;
    if (r < 0.74) return EducationLevel::Secondary;
    return EducationLevel::Other;
}

std::string degree_line(EducationLevel level, const Theme& theme, Rng& rng) {
    switch (level) {
        case EducationLevel::PhD: return expand(pick(kPhdTemplates, rng), theme, rng);
        case EducationLevel::Master:
            return expand(pick(kMasterTemplates, rng), theme, rng);
        case EducationLevel::Bachelor:
            return expand(pick(kBachelorTemplates, rng), theme, rng);
        case EducationLevel::Secondary:
            return expand(pick(kSecondaryTemplates, rng), theme, rng);
        case EducationLevel::Other:
            return expand(pick(kOtherTemplates, rng), theme, rng);
    }
    throw std::logic_error("synth: unknown level");
}

// Levels strictly below `level`, plus Other; used for extra degree fields
// so profiles exercise the max-level precedence rule.
EducationLevel sample_lower_level(EducationLevel level, Rng& rng) {
    const int top = static_cast<int>(level);
    if (top <= 0) return EducationLevel::Other;
    return static_cast<EducationLevel>(rng.next_index(static_cast<std::size_t>(top)));
}

std::string make_positions(const Theme& theme, Rng& rng) {
    std::string text = expand(pick(kPositionTemplates, rng), theme, rng);
    if (rng.next_bernoulli(0.5)) {
        text += " ";
        text += expand(pick(kPositionTemplates, rng), theme, rng);
    }
    return text;
}

std::string make_summary(const Theme& theme, Rng& rng) {
    std::string text;
    for (int s = 0; s < 4; ++s) {
        if (s > 0) text += " ";
        text += expand(pick(kSummaryTemplates, rng), theme, rng);
    }
    return text;
}

void attach_degrees(Profile& p, EducationLevel level, const Theme& theme,
                    Rng& rng) {
    p.education_degree1 = degree_line(level, theme, rng);
    if (rng.next_bernoulli(0.45)) {
        p.education_degree2 =
            degree_line(sample_lower_level(level, rng), theme, rng);
        if (rng.next_bernoulli(0.2)) {
            p.education_degree3 =
                degree_line(sample_lower_level(level, rng), theme, rng);
        }
    }
}

}  // namespace

void SynthConfig::validate() const {
    if (count == 0) throw ConfigError("synth: count must be >= 1");
    if (incomplete_rate < 0.0 || foreign_rate < 0.0 ||
        incomplete_rate + foreign_rate > 1.0) {
        throw ConfigError("synth: rates must be >= 0 and sum to <= 1");
    }
}

Dataset generate_corpus(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);
    IdGenerator ids("synth");
    Dataset out;
    out.provenance = "synthetic corpus, seed " + std::to_string(config.seed);
    for (std::size_t i = 0; i < config.count; ++i) {
        const Theme& theme = kThemes[rng.next_index(kThemes.size())];
        Profile p;
        p.id = ids.next();
        const double kind = rng.next_double();
        if (kind < config.incomplete_rate) {
            // Fails the minimum-content filter: either no positions or no
            // degree fields.
            if (rng.next_bernoulli(0.5)) {
                p.summary_description = make_summary(theme, rng);
                if (rng.next_bernoulli(0.5)) {
                    attach_degrees(p, sample_level(rng), theme, rng);
                }
            } else {
                p.positions_overview = make_positions(theme, rng);
                if (rng.next_bernoulli(0.7)) {
                    p.summary_description = make_summary(theme, rng);
                }
            }
        } else if (kind < config.incomplete_rate + config.foreign_rate) {
            // Survives the minimum-content filter but fails the English
            // stop-word ratio test on the positions text.
            p.positions_overview = pick(kForeignPositions, rng);
            p.summary_description = pick(kForeignSummaries, rng);
            p.education_degree1 = pick(kForeignDegrees, rng);
        } else {
            p.positions_overview = make_positions(theme, rng);
            p.summary_description = make_summary(theme, rng);
            attach_degrees(p, sample_level(rng), theme, rng);
        }
        out.append(std::move(p));
    }
    return out;
}

}  // namespace linkmine
