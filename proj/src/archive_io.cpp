#include <filesystem>

#include <fmt/format.h>

#include "voxpcg/harness.hpp"
#include "voxpcg/qd.hpp"

namespace voxpcg {

namespace {

std::string elite_file(CellIndex c) { return fmt::format("elite_{:02}_{:02}.bin", c.emptiness, c.diameter); }

std::string heatmap_csv(const Archive& archive, double (*value)(const Elite&)) {
    std::string out = "emptiness_bin,diameter_bin,value\n";
    for (int e = 0; e < archive.config().bins_emptiness; ++e)
        for (int d = 0; d < archive.config().bins_diameter; ++d) {
            const Elite* elite = archive.at({e, d});
            out += fmt::format("{},{},{}\n", e, d, elite ? csv_number(value(*elite)) : "");
        }
    return out;
}

}  // namespace

void save_archive(const std::filesystem::path& dir, const QdResult& result, const QdConfig& config) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "elites");
    const Archive& archive = result.archive;

    std::string csv =
        "emptiness_bin,diameter_bin,emptiness,diameter,validity,reliability,diversity,combined,id,parent_id,params_file\n";
    for (const Elite* e : archive.elites()) {
        const CellIndex c = archive.cell_of(e->descriptor);
        const std::string file = elite_file(c);
        csv += fmt::format("{},{},{},{},{},{},{},{},{},{},elites/{}\n", c.emptiness, c.diameter,
                           csv_number(e->descriptor.emptiness_mean), csv_number(e->descriptor.diameter_mean),
                           csv_number(e->fitness.validity), csv_number(e->fitness.reliability),
                           csv_number(e->fitness.diversity), csv_number(e->fitness.combined), e->id, e->parent_id, file);
        Json meta;
        meta["cell"] = {c.emptiness, c.diameter};
        meta["id"] = e->id;
        meta["parent_id"] = e->parent_id;
        meta["descriptor"] = {{"emptiness", e->descriptor.emptiness_mean}, {"diameter", e->descriptor.diameter_mean}};
        meta["fitness"] = {{"validity", e->fitness.validity},
                           {"reliability", e->fitness.reliability},
                           {"diversity", e->fitness.diversity},
                           {"combined", e->fitness.combined}};
        meta["run_seed"] = config.seed;
        meta["steps"] = config.eval.steps;
        save_params_with_sidecar(dir / "elites" / file, e->params, meta);
    }
    write_text(dir / "archive.csv", csv);

    struct Panel {
        const char* name;
        double (*value)(const Elite&);
    };
    const Panel panels[] = {
        {"fitness", [](const Elite& e) { return e.fitness.combined; }},
        {"diversity", [](const Elite& e) { return e.fitness.diversity; }},
        {"occupancy", [](const Elite&) { return 1.0; }},
    };
    for (const auto& p : panels) {
        const std::string text = heatmap_csv(archive, p.value);
        write_text(dir / fmt::format("heatmap_{}.csv", p.name), text);
        write_text(dir / fmt::format("heatmap_{}.svg", p.name),
                   heatmap_svg(text, "emptiness_bin", "diameter_bin", "value", p.name));
    }

    std::string progress = "evaluations,occupancy,best_fitness,restarts\n";
    for (const auto& p : result.progress) {
        progress += fmt::format("{},{},{},{}\n", p.evaluations, p.occupancy, csv_number(p.best_fitness), p.restarts);
    }
    write_text(dir / "progress.csv", progress);
}

}  // namespace voxpcg
