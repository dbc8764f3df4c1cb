// Python bindings for the core pipeline operations. Arrays cross the
// boundary as numpy: float32 for raw features (matching the file format),
// float64 for everything on the sphere.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spheresel/bench.hpp"
#include "spheresel/clustering.hpp"
#include "spheresel/dataio.hpp"
#include "spheresel/geometry.hpp"
#include "spheresel/reconproxy.hpp"
#include "spheresel/selection.hpp"
#include "spheresel/tinynet.hpp"

namespace py = pybind11;
using namespace spheresel;

namespace {

std::vector<double> as_vector(const py::array_t<double, py::array::c_style |
                                                            py::array::forcecast>& arr) {
    if (arr.ndim() != 1)
        throw Error(ErrorCode::DimensionMismatch, "expected a 1-d array");
    return std::vector<double>(arr.data(), arr.data() + arr.shape(0));
}

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

FeatureMatrix to_features(const py::array_t<float, py::array::c_style |
                                                       py::array::forcecast>& arr) {
    if (arr.ndim() != 2)
        throw Error(ErrorCode::DimensionMismatch, "expected a 2-d feature array");
    FeatureMatrix m(static_cast<std::uint32_t>(arr.shape(0)),
                    static_cast<std::uint32_t>(arr.shape(1)));
    std::copy(arr.data(), arr.data() + arr.size(), m.data.begin());
    return m;
}

py::array_t<float> features_to_array(const FeatureMatrix& m) {
    py::array_t<float> out({static_cast<py::ssize_t>(m.rows),
                            static_cast<py::ssize_t>(m.cols)});
    std::copy(m.data.begin(), m.data.end(), out.mutable_data());
    return out;
}

EmbeddingSet to_embeddings(const py::array_t<double, py::array::c_style |
                                                         py::array::forcecast>& arr) {
    if (arr.ndim() != 2)
        throw Error(ErrorCode::DimensionMismatch, "expected a 2-d embedding array");
    EmbeddingSet set(static_cast<std::size_t>(arr.shape(0)),
                     static_cast<std::size_t>(arr.shape(1)));
    std::copy(arr.data(), arr.data() + arr.size(), set.data.begin());
    return set;
}

py::array_t<double> embeddings_to_array(const EmbeddingSet& set) {
    py::array_t<double> out({static_cast<py::ssize_t>(set.count),
                             static_cast<py::ssize_t>(set.dim)});
    std::copy(set.data.begin(), set.data.end(), out.mutable_data());
    return out;
}

LossConfig make_loss(double m, double eps_clamp) {
    LossConfig cfg;
    cfg.m = m;
    cfg.eps_clamp = eps_clamp;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "Hypersphere-embedding active-learning sample selection";

    py::register_exception<Error>(mod, "SphereselError");

    mod.def(
        "normalize",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& v) {
            return to_array(normalize(as_vector(v)));
        },
        py::arg("v"), "Scale a vector to unit L2 norm.");

    mod.def(
        "spherical_distance",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
            return spherical_distance(as_vector(a), as_vector(b));
        },
        py::arg("a"), py::arg("b"),
        "Angular distance arccos(a . b) between unit vectors, in [0, pi].");

    mod.def(
        "angular_loss",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& f,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& g,
           double m, double eps_clamp) {
            const EmbeddingSet fs = to_embeddings(f);
            const EmbeddingSet gs = to_embeddings(g);
            std::vector<UnitEmbedding> fb, gb;
            for (std::size_t i = 0; i < fs.count; ++i)
                fb.emplace_back(fs.row(i).begin(), fs.row(i).end());
            for (std::size_t i = 0; i < gs.count; ++i)
                gb.emplace_back(gs.row(i).begin(), gs.row(i).end());
            return angular_loss(fb, gb, make_loss(m, eps_clamp));
        },
        py::arg("f"), py::arg("g"), py::arg("m") = 4.0, py::arg("eps_clamp") = 1e-7,
        "Mean of (m * arccos(cos_sim(f_i, g_i)))^2 over row pairs.");

    mod.def(
        "angular_loss_grad",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& f,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& g,
           double m, double eps_clamp) {
            auto grads = angular_loss_grad(as_vector(f), as_vector(g),
                                           make_loss(m, eps_clamp));
            return py::make_tuple(to_array(grads.first), to_array(grads.second));
        },
        py::arg("f"), py::arg("g"), py::arg("m") = 4.0, py::arg("eps_clamp") = 1e-7,
        "Pair-loss gradients w.r.t. the pre-normalization vectors of f and g.");

    mod.def(
        "uncertainty_score",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& thetas,
           const std::string& mode) {
            return uncertainty_score(as_vector(thetas), parse_uncertainty_mode(mode));
        },
        py::arg("thetas"), py::arg("mode") = "pairwise_min");

    mod.def(
        "representativeness_score",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& z_u,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& z_r) {
            return representativeness_score(as_vector(z_u), as_vector(z_r));
        },
        py::arg("z_u"), py::arg("z_r"));

    py::class_<TrainedHead>(mod, "TrainedHead")
        .def_property_readonly(
            "loss_history",
            [](const TrainedHead& head) { return to_array(head.loss_history); })
        .def(
            "embed",
            [](const TrainedHead& head,
               const py::array_t<float, py::array::c_style | py::array::forcecast>& x,
               const std::string& side, int threads) {
                const FeatureMatrix m = to_features(x);
                const HeadSide hs =
                    side == "teacher" ? HeadSide::Teacher : HeadSide::Student;
                return embeddings_to_array(embed_all(head, m, hs, threads));
            },
            py::arg("features"), py::arg("side") = "student", py::arg("threads") = 1,
            "Embed every feature row onto the unit hypersphere.")
        .def("save", [](const TrainedHead& head, const std::filesystem::path& path) {
            save_head_checkpoint(head, path);
        });

    mod.def(
        "train_head",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& originals,
           const py::array_t<float, py::array::c_style | py::array::forcecast>& recons,
           std::size_t epochs, double learning_rate, double lr_floor,
           std::size_t batch_size, double ema_momentum, std::uint64_t seed,
           std::size_t hidden_dim, std::size_t d_embed, double m, double eps_clamp) {
            const FeatureMatrix orig = to_features(originals);
            const FeatureMatrix rec = to_features(recons);
            if (orig.rows != rec.rows || orig.cols != rec.cols)
                throw Error(ErrorCode::DimensionMismatch,
                            "originals and reconstructions must have equal shape");
            FeatureMatrix all(0, orig.cols);
            std::vector<PairIndices> pairs;
            for (std::uint32_t i = 0; i < orig.rows; ++i) {
                all.append_row(orig.row(i));
                all.append_row(rec.row(i));
                pairs.push_back({2 * i, 2 * i + 1});
            }
            TrainerConfig cfg;
            cfg.epochs = epochs;
            cfg.learning_rate = learning_rate;
            cfg.lr_floor = lr_floor;
            cfg.batch_size = batch_size;
            cfg.ema_momentum = ema_momentum;
            cfg.seed = seed;
            cfg.hidden_dim = hidden_dim;
            cfg.embed_dim = d_embed;
            cfg.loss = make_loss(m, eps_clamp);
            return train_heads(all, pairs, cfg);
        },
        py::arg("originals"), py::arg("recons"), py::arg("epochs") = 200,
        py::arg("learning_rate") = 1e-4, py::arg("lr_floor") = 0.0,
        py::arg("batch_size") = 32, py::arg("ema_momentum") = 0.99,
        py::arg("seed") = 42, py::arg("hidden_dim") = 512, py::arg("d_embed") = 256,
        py::arg("m") = 4.0, py::arg("eps_clamp") = 1e-7,
        "Teacher-student training on row-aligned original/reconstruction pairs.");

    mod.def("load_head", [](const std::filesystem::path& path) {
        return load_head_checkpoint(path);
    });

    py::class_<ClusterModel>(mod, "ClusterModel")
        .def_property_readonly("k", [](const ClusterModel& m) { return m.k; })
        .def_property_readonly(
            "centroids",
            [](const ClusterModel& m) {
                py::array_t<double> out({static_cast<py::ssize_t>(m.k),
                                         static_cast<py::ssize_t>(m.dim)});
                std::copy(m.centroids.begin(), m.centroids.end(), out.mutable_data());
                return out;
            })
        .def_property_readonly(
            "assignments",
            [](const ClusterModel& m) {
                py::array_t<std::uint32_t> out(static_cast<py::ssize_t>(m.assignments.size()));
                std::copy(m.assignments.begin(), m.assignments.end(), out.mutable_data());
                return out;
            })
        .def_property_readonly(
            "objective_history",
            [](const ClusterModel& m) { return to_array(m.objective_history); })
        .def(
            "angles_to_centroids",
            [](const ClusterModel& m,
               const py::array_t<double, py::array::c_style | py::array::forcecast>& z) {
                return to_array(angles_to_centroids(m, as_vector(z)));
            },
            py::arg("z"))
        .def("save", [](const ClusterModel& m, const std::filesystem::path& path) {
            save_cluster_checkpoint(m, path);
        });

    mod.def(
        "fit_clusters",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& embeddings,
           std::size_t k, std::uint64_t seed, std::size_t max_iters, double tol) {
            return fit(to_embeddings(embeddings), k, seed, max_iters, tol);
        },
        py::arg("embeddings"), py::arg("k") = 4, py::arg("seed") = 42,
        py::arg("max_iters") = 100, py::arg("tol") = 1e-6,
        "Spherical k-means over unit embeddings.");

    mod.def("load_clusters", [](const std::filesystem::path& path) {
        return load_cluster_checkpoint(path);
    });

    mod.def(
        "select",
        [](const std::vector<std::string>& ids, const std::vector<std::string>& domains,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& pool,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& recon,
           const ClusterModel& model, double omega, const std::string& uncertainty_mode,
           const std::string& combine_mode, double alpha_percent, int threads) {
            SelectionInputs inputs;
            inputs.ids = ids;
            inputs.domains = domains;
            inputs.pool = to_embeddings(pool);
            inputs.recon = to_embeddings(recon);
            ScoringConfig cfg;
            cfg.omega = omega;
            cfg.uncertainty_mode = parse_uncertainty_mode(uncertainty_mode);
            cfg.combine_mode = parse_combine_mode(combine_mode);
            cfg.alpha_percent = alpha_percent;
            const SelectionReport report = select(inputs, model, cfg, threads);
            py::list rows;
            for (const SelectionRow& row : report.rows) {
                py::dict d;
                d["id"] = row.id;
                d["domain"] = row.domain;
                d["uncertainty"] = row.uncertainty;
                d["representativeness"] = row.representativeness;
                d["informativeness"] = row.informativeness;
                d["rank"] = row.rank;
                d["selected"] = row.selected;
                rows.append(std::move(d));
            }
            return rows;
        },
        py::arg("ids"), py::arg("domains"), py::arg("pool"), py::arg("recon"),
        py::arg("model"), py::arg("omega") = 1.0,
        py::arg("uncertainty_mode") = "pairwise_min", py::arg("combine_mode") = "raw",
        py::arg("alpha_percent") = 20.0, py::arg("threads") = 1,
        "Rank the pool by informativeness and mark the top-alpha% budget. "
        "Rows come back sorted by rank.");

    mod.def(
        "proxy_reconstruct",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& x,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& offset,
           double lam) {
            if (x.ndim() != 1)
                throw Error(ErrorCode::DimensionMismatch, "expected a 1-d feature vector");
            std::vector<float> features(x.data(), x.data() + x.shape(0));
            ProxyConfig cfg;
            cfg.lambda = lam;
            AffineMap map;
            map.offset = as_vector(offset);
            cfg.maps.emplace("d", std::move(map));
            const auto out = proxy_reconstruct(features, "d", cfg);
            py::array_t<float> result(static_cast<py::ssize_t>(out.size()));
            std::copy(out.begin(), out.end(), result.mutable_data());
            return result;
        },
        py::arg("features"), py::arg("offset"), py::arg("lam") = 1.0,
        "Blend a feature vector toward its offset-mapped image.");

    mod.def(
        "domain_bias",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& source,
           const std::map<std::string,
                          py::array_t<float, py::array::c_style | py::array::forcecast>>&
               targets) {
            std::vector<std::pair<std::string, FeatureMatrix>> sets;
            for (const auto& [name, arr] : targets) sets.emplace_back(name, to_features(arr));
            const DomainBiasReport report = domain_bias(to_features(source), sets);
            py::dict out;
            auto pack = [](const DomainStats& s) {
                py::dict d;
                d["count"] = s.count;
                d["mean"] = s.mean;
                d["std"] = s.stddev;
                d["bias"] = s.bias;
                return d;
            };
            out[py::str(report.source.domain)] = pack(report.source);
            for (const DomainStats& s : report.targets) out[py::str(s.domain)] = pack(s);
            return out;
        },
        py::arg("source"), py::arg("targets"),
        "Per-domain cosine-similarity mean/std and |mean - source mean| bias.");

    mod.def("read_features", [](const std::filesystem::path& path) {
        return features_to_array(read_features(path));
    });
    mod.def("write_features",
            [](const py::array_t<float, py::array::c_style | py::array::forcecast>& arr,
               const std::filesystem::path& path) {
                write_features(to_features(arr), path);
            });
}
