#include "eval/evaluate.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "metrics/metrics.hpp"
#include "train/trainer.hpp"

namespace medivista {

namespace {

struct Welford {
    int n = 0;
    double mean = 0.0, m2 = 0.0;
    void push(double x) {
        ++n;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double stddev() const { return n > 1 ? std::sqrt(m2 / (n - 1)) : 0.0; }
};

std::string fmt(std::optional<double> v) {
    if (!v) return "-";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", *v);
    return buf;
}

std::string fmt(double v) { return fmt(std::optional<double>(v)); }

}  // namespace

EvalReport evaluate_split(const MediVistaModel& model, const Dataset& data,
                          const std::string& split) {
    return evaluate_predictions(data, split, [&](size_t i) {
        return predict_masks(model, data.load_video(i));
    });
}

EvalReport evaluate_predictions(const Dataset& data, const std::string& split,
                                const MaskPredictor& predictor) {
    const auto idx = data.split_indices(split);
    if (idx.empty()) throw std::invalid_argument("evaluate: split '" + split + "' is empty");

    EvalReport report;
    for (size_t c = 1; c < data.classes.size(); ++c) report.structures.push_back(data.classes[c]);

    const int t = data.frames;
    const int64_t plane = static_cast<int64_t>(data.height) * data.width;
    std::vector<double> edv_pred, esv_pred, ef_pred, edv_true, esv_true, ef_true;

    for (size_t i : idx) {
        const DatasetRecord& rec = data.records[i];
        std::vector<uint8_t> gt = data.load_mask(i);
        std::vector<uint8_t> pred = predictor(i);

        VideoEval ve;
        ve.id = rec.id;
        ve.true_edv_ml = rec.edv_ml;
        ve.true_esv_ml = rec.esv_ml;
        ve.true_ef_pct = rec.ef_pct;

        for (size_t s = 0; s < report.structures.size(); ++s) {
            const uint8_t cls = static_cast<uint8_t>(s + 1);
            StructureMetrics sm;
            sm.structure = report.structures[s];
            double dice_sum = 0.0;
            Welford dh, da;
            for (int f = 0; f < t; ++f) {
                std::vector<uint8_t> pf(pred.begin() + f * plane, pred.begin() + (f + 1) * plane);
                std::vector<uint8_t> gf(gt.begin() + f * plane, gt.begin() + (f + 1) * plane);
                dice_sum += dice(pf, gf, cls);
                auto pb = mask_boundary(pf, data.height, data.width, cls);
                auto gb = mask_boundary(gf, data.height, data.width, cls);
                if (!pb.empty() && !gb.empty()) {
                    dh.push(hausdorff(pb, gb, data.spacing_mm));
                    da.push(assd(pb, gb, data.spacing_mm));
                }
            }
            sm.dice = dice_sum / t;
            if (dh.n > 0) {
                sm.dh_mm = dh.mean;
                sm.da_mm = da.mean;
            }
            MaskSequence pseq{pred, t, data.height, data.width, data.spacing_mm};
            MaskSequence gseq{gt, t, data.height, data.width, data.spacing_mm};
            try {
                sm.l_pred = temporal_consistency(pseq, cls);
            } catch (const std::invalid_argument&) {
            }
            try {
                sm.l_gt = temporal_consistency(gseq, cls);
            } catch (const std::invalid_argument&) {
            }
            ve.structures.push_back(std::move(sm));
        }

        // Simpson volumes from the predicted endo masks at ED/ES
        try {
            std::vector<uint8_t> ped(pred.begin() + rec.ed * plane,
                                     pred.begin() + (rec.ed + 1) * plane);
            std::vector<uint8_t> pes(pred.begin() + rec.es * plane,
                                     pred.begin() + (rec.es + 1) * plane);
            VolumeEstimate vol;
            vol.edv_ml = volume_from_mask_ml(ped, data.height, data.width, 1, data.spacing_mm);
            vol.esv_ml = volume_from_mask_ml(pes, data.height, data.width, 1, data.spacing_mm);
            vol.ef_pct = ejection_fraction({vol.edv_ml, vol.esv_ml});
            ve.pred_volumes = vol;
            if (rec.edv_ml > 0.0) {
                edv_pred.push_back(vol.edv_ml);
                esv_pred.push_back(vol.esv_ml);
                ef_pred.push_back(vol.ef_pct);
                edv_true.push_back(rec.edv_ml);
                esv_true.push_back(rec.esv_ml);
                ef_true.push_back(rec.ef_pct);
            }
        } catch (const std::invalid_argument&) {
            // endo absent from a predicted key frame: volumes unreported
        }
        report.videos.push_back(std::move(ve));
    }

    if (edv_pred.size() >= 2) {
        try {
            PearsonBlock pb;
            pb.edv = pearson(edv_pred, edv_true);
            pb.esv = pearson(esv_pred, esv_true);
            pb.ef = pearson(ef_pred, ef_true);
            pb.samples = static_cast<int>(edv_pred.size());
            report.pearson_block = pb;
        } catch (const std::invalid_argument&) {
            // constant ground truth leaves the block out
        }
    }
    return report;
}

void write_report_csv(const std::filesystem::path& file, const EvalReport& report) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("report: cannot write " + file.string());

    out << "video,structure,dice,dh_mm,da_mm,L\n";
    for (const VideoEval& v : report.videos) {
        for (const StructureMetrics& s : v.structures) {
            out << v.id << "," << s.structure << "," << fmt(s.dice) << "," << fmt(s.dh_mm) << ","
                << fmt(s.da_mm) << "," << fmt(s.l_pred) << "\n";
        }
    }

    out << "\nsummary,structure,dice_mean,dice_std,dh_mean,dh_std,da_mean,da_std,L_mean,L_std\n";
    for (size_t s = 0; s < report.structures.size(); ++s) {
        Welford wd, wh, wa, wl;
        for (const VideoEval& v : report.videos) {
            const StructureMetrics& sm = v.structures[s];
            wd.push(sm.dice);
            if (sm.dh_mm) wh.push(*sm.dh_mm);
            if (sm.da_mm) wa.push(*sm.da_mm);
            if (sm.l_pred) wl.push(*sm.l_pred);
        }
        out << "summary," << report.structures[s] << "," << fmt(wd.mean) << "," << fmt(wd.stddev())
            << "," << (wh.n ? fmt(wh.mean) : "-") << "," << (wh.n ? fmt(wh.stddev()) : "-") << ","
            << (wa.n ? fmt(wa.mean) : "-") << "," << (wa.n ? fmt(wa.stddev()) : "-") << ","
            << (wl.n ? fmt(wl.mean) : "-") << "," << (wl.n ? fmt(wl.stddev()) : "-") << "\n";
    }

    out << "\nvolumes,video,edv_pred_ml,esv_pred_ml,ef_pred_pct,edv_true_ml,esv_true_ml,"
           "ef_true_pct,pathological_risk\n";
    for (const VideoEval& v : report.videos) {
        out << "volumes," << v.id << ",";
        if (v.pred_volumes) {
            const VolumeEstimate& p = *v.pred_volumes;
            out << fmt(p.edv_ml) << "," << fmt(p.esv_ml) << "," << fmt(p.ef_pct);
        } else {
            out << "-,-,-";
        }
        out << "," << fmt(v.true_edv_ml) << "," << fmt(v.true_esv_ml) << "," << fmt(v.true_ef_pct)
            << ",";
        // EF below 45% is flagged as pathological risk
        if (v.pred_volumes) {
            out << (v.pred_volumes->ef_pct < 45.0 ? "yes" : "no");
        } else {
            out << "-";
        }
        out << "\n";
    }

    if (report.pearson_block) {
        out << "\npearson,metric,r,samples\n";
        out << "pearson,edv," << fmt(report.pearson_block->edv) << ","
            << report.pearson_block->samples << "\n";
        out << "pearson,esv," << fmt(report.pearson_block->esv) << ","
            << report.pearson_block->samples << "\n";
        out << "pearson,ef," << fmt(report.pearson_block->ef) << ","
            << report.pearson_block->samples << "\n";
    }
}

}  // namespace medivista
