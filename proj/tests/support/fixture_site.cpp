#include "support/fixture_site.hpp"

#include <cstdio>
#include <filesystem>

#include "linkmine/util.hpp"

namespace linkmine::testing {

namespace fs = std::filesystem;

namespace {

constexpr const char* kHost = "http://directory.test";

// Every non-leaf page carries these; none may be fetched (duplicates,
// off-host, non-http).
const char* kNoisyLinks =
    "<p><a href=\"/\">Home</a></p>\n"
    "<p><a href=\"http://elsewhere.test/away\">Partner site</a></p>\n"
    "<p><a href=\"mailto:info@directory.test\">Contact</a></p>\n";

std::string page_shell(const std::string& title, const std::string& body) {
    return "<!doctype html>\n<html><head><title>" + title +
           "</title></head>\n<body>\n" + body + "</body></html>\n";
}

void write_page(const std::string& root, const std::string& relpath,
                const std::string& content) {
    const fs::path p = fs::path(root) / relpath;
    fs::create_directories(p.parent_path());
    write_file(p.string(), content);
}

// The five degree templates cycle PhD, Master, Bachelor, Secondary,
// Other, so a hundred leaves split 20/20/20/20/20 across levels.
const char* kDegree1[] = {"PhD, fixture science", "MSc, fixture science",
                          "BSc, fixture science", "Secondary school diploma",
                          "Fixture training course"};

}  // namespace

FixtureSite build_fixture_site(const std::string& root_dir,
                               std::size_t regions,
                               std::size_t groups_per_region,
                               std::size_t leaves_per_group) {
    FixtureSite site;
    site.root_dir = root_dir;
    site.seed_url = std::string(kHost) + "/";
    site.bfs_order.push_back(site.seed_url);

    std::string root_body = "<h1>Fixture Directory</h1>\n<ul>\n";
    for (std::size_t r = 0; r < regions; ++r) {
        const std::string region_path = "/dir/region-" + std::to_string(r);
        root_body += "  <li><a href=\"" + region_path + "\">Region " +
                     std::to_string(r) + "</a></li>\n";
        site.bfs_order.push_back(kHost + region_path);
    }
    root_body += "</ul>\n";
    root_body += kNoisyLinks;
    write_page(root_dir, "index.html", page_shell("Directory", root_body));

    // Group pages in region order, then leaves in group order: exactly
    // the breadth-first layering the crawl must reproduce at
    // randomness 0.
    std::size_t leaf_index = 0;
    std::vector<std::string> group_bodies;
    for (std::size_t r = 0; r < regions; ++r) {
        const std::string region_rel = "dir/region-" + std::to_string(r);
        std::string region_body =
            "<h1>Region " + std::to_string(r) + "</h1>\n<ul>\n";
        for (std::size_t g = 0; g < groups_per_region; ++g) {
            // Relative href; resolves against /dir/region-<r> to
            // /dir/region-<r>/group-<g>.
            region_body += "  <li><a href=\"region-" + std::to_string(r) +
                           "/group-" + std::to_string(g) + "\">Group " +
                           std::to_string(g) + "</a></li>\n";
            site.bfs_order.push_back(std::string(kHost) + "/" + region_rel +
                                     "/group-" + std::to_string(g));
        }
        region_body += "</ul>\n";
        region_body += kNoisyLinks;
        write_page(root_dir, region_rel + ".html",
                   page_shell("Region " + std::to_string(r), region_body));
    }
    for (std::size_t r = 0; r < regions; ++r) {
        for (std::size_t g = 0; g < groups_per_region; ++g) {
            std::string group_body = "<h1>Group</h1>\n<ul>\n";
            for (std::size_t l = 0; l < leaves_per_group; ++l) {
                char num[8];
                std::snprintf(num, sizeof(num), "%03zu", leaf_index);
                const std::string leaf_path =
                    std::string("/pub/profile-") + num;
                group_body += "  <li><a href=\"" + leaf_path +
                              "\">Profile " + num + "</a></li>\n";
                site.bfs_order.push_back(kHost + leaf_path);

                FixtureLeaf leaf;
                leaf.url = kHost + leaf_path;
                const std::string n = std::to_string(leaf_index);
                leaf.personal_fields["full_name"] = "Member " + n;
                leaf.personal_fields["location"] =
                    "City " + std::to_string(leaf_index % 7);
                const bool rnd = leaf_index % 10 == 0;
                leaf.content_fields["positions_overview"] =
                    rnd ? "I am currently head of R&D at Fixture Corp, badge " +
                              n + "."
                        : "I am currently a Software Engineer at Fixture "
                          "Corp, badge " +
                              n + ".";
                leaf.content_fields["summary_description"] =
                    "I have worked on fixture systems for many years, entry " +
                    n + ".";
                leaf.content_fields["education_degree1"] =
                    kDegree1[leaf_index % 5];
                if (leaf_index % 2 == 0) {
                    leaf.content_fields["education_degree2"] =
                        "Evening classes, cohort " + n;
                }
                if (leaf_index % 3 == 0) {
                    leaf.content_fields["education_degree3"] =
                        "Workshop attendance, batch " + n;
                }

                std::string leaf_body;
                leaf_body += "<div class=\"member-name\">" +
                             leaf.personal_fields["full_name"] + "</div>\n";
                leaf_body += "<span data-field=\"location\">" +
                             leaf.personal_fields["location"] + "</span>\n";
                std::string positions_html =
                    leaf.content_fields["positions_overview"];
                if (rnd) {
                    // Entity-encoded in markup; ground truth is decoded.
                    const auto at = positions_html.find("R&D");
                    positions_html.replace(at, 3, "R&amp;D");
                }
                leaf_body += "<div class=\"positions\">" + positions_html +
                             "</div>\n";
                leaf_body += "<div id=\"summary\">" +
                             leaf.content_fields["summary_description"] +
                             "</div>\n";
                leaf_body += "<div class=\"degree-1\">" +
                             leaf.content_fields["education_degree1"] +
                             "</div>\n";
                if (leaf.content_fields.count("education_degree2")) {
                    leaf_body += "<div data-kind=\"degree2\">" +
                                 leaf.content_fields["education_degree2"] +
                                 "</div>\n";
                }
                if (leaf.content_fields.count("education_degree3")) {
                    leaf_body += "<span class=\"degree-3\">" +
                                 leaf.content_fields["education_degree3"] +
                                 "</span>\n";
                }
                leaf_body += kNoisyLinks;
                write_page(root_dir, "pub/profile-" + std::string(num) + ".html",
                           page_shell("Member " + n, leaf_body));
                site.leaves.push_back(std::move(leaf));
                ++leaf_index;
            }
            group_bodies.push_back(group_body);
        }
    }
    // Group page files, now that leaf bodies fixed the numbering.
    std::size_t gi = 0;
    for (std::size_t r = 0; r < regions; ++r) {
        for (std::size_t g = 0; g < groups_per_region; ++g) {
            std::string body = group_bodies[gi++];
            body += "</ul>\n";
            body += kNoisyLinks;
            write_page(root_dir,
                       "dir/region-" + std::to_string(r) + "/group-" +
                           std::to_string(g) + ".html",
                       page_shell("Group", body));
        }
    }
    return site;
}

}  // namespace linkmine::testing
