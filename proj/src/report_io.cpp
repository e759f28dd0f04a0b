#include "wavetuner/report_io.hpp"

#include <sstream>

namespace wavetuner::report_io {

using nlohmann::json;

json entropy_tree_to_json(const wavelet::EntropyTree& tree) {
    json nodes = json::object();
    for (const auto& n : tree.nodes) {
        std::string key = n.label.empty() ? "root" : n.label;
        nodes[key] = {{"entropy_bits", n.entropy_bits},
                      {"energy_fraction", n.energy_fraction},
                      {"split", n.split}};
    }
    return {{"depth", tree.depth}, {"nodes", nodes}};
}

json train_report_to_json(const train::TrainReport& report) {
    json epochs = json::array();
    for (const auto& e : report.epochs)
        epochs.push_back(
            {{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}});
    return {{"epochs", epochs},
            {"best_epoch", report.best_epoch},
            {"best_val_loss", report.best_val_loss},
            {"test_mse", report.test_mse},
            {"test_mae", report.test_mae}};
}

std::string losses_csv(const train::TrainReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "epoch,train_loss,val_loss\n";
    for (const auto& e : report.epochs)
        out << e.epoch << "," << e.train_loss << "," << e.val_loss << "\n";
    return out.str();
}

}  // namespace wavetuner::report_io
