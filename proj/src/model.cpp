#include "stim/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stim {

Task task_from_string(const std::string& name) {
    if (name == "ctr") return Task::Ctr;
    if (name == "ctcvr") return Task::Ctcvr;
    if (name == "both") return Task::Both;
    throw ConfigError("unknown task: " + name);
}

std::string to_string(Task t) {
    switch (t) {
        case Task::Ctr: return "ctr";
        case Task::Ctcvr: return "ctcvr";
        case Task::Both: return "both";
    }
    return "?";
}

MoeVariant moe_variant_from_string(const std::string& name) {
    if (name == "M1") return MoeVariant::M1;
    if (name == "M2") return MoeVariant::M2;
    if (name == "M3") return MoeVariant::M3;
    if (name == "M4") return MoeVariant::M4;
    throw ConfigError("unknown MoE variant: " + name);
}

std::string to_string(MoeVariant v) {
    switch (v) {
        case MoeVariant::M1: return "M1";
        case MoeVariant::M2: return "M2";
        case MoeVariant::M3: return "M3";
        case MoeVariant::M4: return "M4";
    }
    return "?";
}

void ModelConfig::validate() const {
    if (k < 1) throw ConfigError("config: k must be >= 1");
    if (embedding_dim < 1) throw ConfigError("config: embedding_dim must be >= 1");
    if (vocab_items < 2 || vocab_categories < 2 || vocab_shops < 2)
        throw ConfigError("config: vocabularies must have at least 2 rows");
    masks.hour.validate();
    masks.week.validate();
    masks.geo.validate();
    moe.validate();
    hmin.validate();
    if (moe.d_q != hmin.d_q)
        throw ConfigError("config: moe.d_q must equal hmin.d_q");
}

namespace {

nlohmann::json curve_to_json(const CurveParams& c) {
    return {{"family", to_string(c.family)}, {"S", c.S},       {"I", c.I},
            {"R_init", c.R_init},            {"R_final", c.R_final},
            {"k_p", c.k_p},                  {"m_p", c.m_p},   {"a_l", c.a_l},
            {"b_l", c.b_l},                  {"c_l", c.c_l}};
}

CurveParams curve_from_json(const nlohmann::json& j) {
    CurveParams c;
    if (j.contains("family"))
        c.family = curve_family_from_string(j.at("family").get<std::string>());
    c.S = j.value("S", c.S);
    c.I = j.value("I", c.I);
    c.R_init = j.value("R_init", c.R_init);
    c.R_final = j.value("R_final", c.R_final);
    c.k_p = j.value("k_p", c.k_p);
    c.m_p = j.value("m_p", c.m_p);
    c.a_l = j.value("a_l", c.a_l);
    c.b_l = j.value("b_l", c.b_l);
    c.c_l = j.value("c_l", c.c_l);
    return c;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

nlohmann::json ModelConfig::to_json() const {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [a, b] : moe.pairs)
        pairs.push_back({to_string(a), to_string(b)});
    return {
        {"seed", seed},
        {"k", k},
        {"embedding_dim", embedding_dim},
        {"vocab", {{"items", vocab_items},
                   {"categories", vocab_categories},
                   {"shops", vocab_shops}}},
        {"task", to_string(task)},
        {"curve", {{"hour", curve_to_json(masks.hour)},
                   {"week", curve_to_json(masks.week)},
                   {"geo", curve_to_json(masks.geo)}}},
        {"time_mapping",
         masks.mapping == TimeMapping::RescaledGap ? "rescaled" : "index"},
        {"ablation", {{"n", to_string(ablation_n)}, {"m", to_string(ablation_m)}}},
        {"moe", {{"alpha_holiday", moe.alpha_holiday},
                 {"d_q", moe.d_q},
                 {"expert_hidden", moe.expert_hidden},
                 {"pairs", pairs}}},
        {"hmin", {{"heads", hmin.heads},
                  {"d_k", hmin.d_k},
                  {"d_q", hmin.d_q},
                  {"hidden", hmin.hidden}}},
        {"head_hidden", head_hidden},
        {"gsu_only", gsu_only},
    };
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        c.k = j.value("k", c.k);
        c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
        if (j.contains("vocab")) {
            const auto& v = j.at("vocab");
            c.vocab_items = v.value("items", c.vocab_items);
            c.vocab_categories = v.value("categories", c.vocab_categories);
            c.vocab_shops = v.value("shops", c.vocab_shops);
        }
        if (j.contains("task"))
            c.task = task_from_string(j.at("task").get<std::string>());
        if (j.contains("curve")) {
            const auto& cv = j.at("curve");
            if (cv.contains("hour")) c.masks.hour = curve_from_json(cv.at("hour"));
            if (cv.contains("week")) c.masks.week = curve_from_json(cv.at("week"));
            if (cv.contains("geo")) c.masks.geo = curve_from_json(cv.at("geo"));
        }
        if (j.contains("time_mapping")) {
            const std::string m = j.at("time_mapping").get<std::string>();
            if (m == "rescaled") c.masks.mapping = TimeMapping::RescaledGap;
            else if (m == "index") c.masks.mapping = TimeMapping::Index;
            else throw ConfigError("unknown time_mapping: " + m);
        }
        if (j.contains("ablation")) {
            const auto& a = j.at("ablation");
            if (a.contains("n"))
                c.ablation_n = mask_variant_from_string(a.at("n").get<std::string>());
            if (a.contains("m"))
                c.ablation_m = moe_variant_from_string(a.at("m").get<std::string>());
        }
        if (j.contains("moe")) {
            const auto& m = j.at("moe");
            c.moe.alpha_holiday = m.value("alpha_holiday", c.moe.alpha_holiday);
            c.moe.d_q = m.value("d_q", c.moe.d_q);
            if (m.contains("expert_hidden"))
                c.moe.expert_hidden = m.at("expert_hidden").get<std::vector<std::size_t>>();
            if (m.contains("pairs")) {
                c.moe.pairs.clear();
                for (const auto& p : m.at("pairs"))
                    c.moe.pairs.emplace_back(
                        moe_part_from_string(p.at(0).get<std::string>()),
                        moe_part_from_string(p.at(1).get<std::string>()));
            }
        }
        if (j.contains("hmin")) {
            const auto& h = j.at("hmin");
            c.hmin.heads = h.value("heads", c.hmin.heads);
            c.hmin.d_k = h.value("d_k", c.hmin.d_k);
            c.hmin.d_q = h.value("d_q", c.hmin.d_q);
            if (h.contains("hidden"))
                c.hmin.hidden = h.at("hidden").get<std::vector<std::size_t>>();
        }
        if (j.contains("head_hidden"))
            c.head_hidden = j.at("head_hidden").get<std::vector<std::size_t>>();
        c.gsu_only = j.value("gsu_only", c.gsu_only);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed model config: ") + e.what());
    }
    c.validate();
    return c;
}

std::string ModelConfig::fingerprint() const {
    std::ostringstream out;
    out << std::hex << fnv1a64(to_json().dump());
    return out.str();
}

StimModel::StimModel(ModelConfig config) : config_(std::move(config)) {
    config_.validate();
    std::mt19937_64 rng(config_.seed);
    const std::size_t e = config_.embedding_dim;

    emb_item_ = EmbeddingTable(&params_, "embed/item", config_.vocab_items, e, rng);
    emb_category_ = EmbeddingTable(&params_, "embed/category", config_.vocab_categories, e, rng);
    emb_shop_ = EmbeddingTable(&params_, "embed/shop", config_.vocab_shops, e, rng);
    emb_hour_ = EmbeddingTable(&params_, "embed/hour", 25, e, rng);
    emb_weekday_ = EmbeddingTable(&params_, "embed/weekday", 8, e, rng);
    emb_geo_group_ = EmbeddingTable(&params_, "embed/geo_group", 4, e, rng);
    emb_holiday_ = EmbeddingTable(&params_, "embed/holiday", 3, e, rng);

    key_proj_ = FeedForwardBlock(&params_, "keys/proj", {}, config_.hmin.d_k);
    key_proj_.bind(6 * e, rng);

    if (!config_.gsu_only) {
        if (config_.ablation_n != MaskVariant::N3) {
            refiner_ = FeedForwardBlock(&params_, "masks/refiner", {}, 3,
                                        Activation::Identity, Activation::Sigmoid);
            refiner_.bind(3, rng);
        }
        if (config_.ablation_m == MoeVariant::M1) {
            m1_query_ = FeedForwardBlock(&params_, "moe/m1_query",
                                         config_.moe.expert_hidden, config_.moe.d_q);
            m1_query_.bind(7 * e, rng);
        } else {
            moe_ = QueryMoe(&params_, "moe", config_.moe, rng);
            moe_.bind(7 * e, e, 2 * e, e, 3 * e, rng);
        }
        hmin_ = HminUnit(&params_, "hmin", config_.hmin, rng);
        hmin_.bind(config_.hmin.d_k, rng);
    }

    const std::size_t st_dim =
        config_.gsu_only
            ? config_.hmin.d_k
            : 3 * (config_.ablation_m == MoeVariant::M4 ? 5u : 1u) *
                  config_.hmin.output_dim();
    const std::size_t feat_dim = st_dim + 7 * e;
    if (config_.task == Task::Ctr || config_.task == Task::Both) {
        head_ctr_ = FeedForwardBlock(&params_, "head/ctr", config_.head_hidden, 1,
                                     Activation::Relu, Activation::Sigmoid);
        head_ctr_.bind(feat_dim, rng);
    }
    if (config_.task == Task::Ctcvr || config_.task == Task::Both) {
        head_ctcvr_ = FeedForwardBlock(&params_, "head/ctcvr", config_.head_hidden, 1,
                                       Activation::Relu, Activation::Sigmoid);
        head_ctcvr_.bind(feat_dim, rng);
    }
}

VarPtr StimModel::features(const std::vector<const Row*>& batch,
                           std::vector<std::size_t>* empty_rows) {
    const std::size_t B = batch.size();
    const std::size_t L = static_cast<std::size_t>(config_.k);
    const std::size_t e = config_.embedding_dim;

    // GSU compression and per-row masks.
    std::vector<CompressedSequence> seqs;
    seqs.reserve(B);
    for (const Row* row : batch)
        seqs.push_back(gsu_search(row->sequence.events, row->request.category_id,
                                  config_.k));

    std::vector<bool> valid(B * L, false);
    std::vector<std::int64_t> ev_item(B * L, 0), ev_cat(B * L, 0), ev_shop(B * L, 0);
    std::vector<std::int64_t> ev_hour(B * L, 0), ev_wd(B * L, 0), ev_geo(B * L, 0);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t l = 0; l < L; ++l) {
            if (!seqs[b].valid[l]) continue;
            const BehaviorEvent& ev = seqs[b].events[l];
            valid[b * L + l] = true;
            ev_item[b * L + l] = ev.item_id;
            ev_cat[b * L + l] = ev.category_id;
            ev_shop[b * L + l] = ev.shop_id;
            ev_hour[b * L + l] = ev.hour_of_day + 1;
            ev_wd[b * L + l] = ev.weekday + 1;
            ev_geo[b * L + l] =
                static_cast<std::int64_t>(assign_geo_group(ev.geohash6)) + 1;
        }

    if (empty_rows) {
        empty_rows->clear();
        for (std::size_t b = 0; b < B; ++b)
            if (seqs[b].valid_count() == 0) empty_rows->push_back(b);
    }

    VarPtr keys = key_proj_.forward(ops::concat_cols(
        {emb_item_.lookup(ev_item), emb_category_.lookup(ev_cat),
         emb_shop_.lookup(ev_shop), emb_hour_.lookup(ev_hour),
         emb_weekday_.lookup(ev_wd), emb_geo_group_.lookup(ev_geo)}));

    // Request-context embeddings; slice layout [hour | week | loc | item].
    std::vector<std::int64_t> rq_hour(B), rq_wd(B), rq_hol(B), rq_geo(B);
    std::vector<std::int64_t> rq_item(B), rq_cat(B), rq_shop(B);
    std::vector<double> holiday(B, 0.0);
    for (std::size_t b = 0; b < B; ++b) {
        const RequestContext& rq = batch[b]->request;
        rq_hour[b] = rq.hour_of_day + 1;
        rq_wd[b] = rq.weekday + 1;
        rq_hol[b] = rq.is_holiday + 1;
        rq_geo[b] = static_cast<std::int64_t>(assign_geo_group(rq.geohash6)) + 1;
        rq_item[b] = rq.item_id;
        rq_cat[b] = rq.category_id;
        rq_shop[b] = rq.shop_id;
        holiday[b] = static_cast<double>(rq.is_holiday);
    }
    VarPtr x = ops::concat_cols(
        {emb_hour_.lookup(rq_hour), emb_weekday_.lookup(rq_wd),
         emb_holiday_.lookup(rq_hol), emb_geo_group_.lookup(rq_geo),
         emb_item_.lookup(rq_item), emb_category_.lookup(rq_cat),
         emb_shop_.lookup(rq_shop)});

    if (config_.gsu_only) {
        // Mean pooling over valid positions; no masks, no attention.
        Tensor pool_w = Tensor::zeros({B, L});
        for (std::size_t b = 0; b < B; ++b) {
            const int n = seqs[b].valid_count();
            if (n == 0) continue;
            for (std::size_t l = 0; l < L; ++l)
                if (valid[b * L + l]) pool_w.at(b, l) = 1.0 / n;
        }
        return ops::concat_cols({ops::attention_pool(constant(pool_w), keys), x});
    }

    // Raw forgetting masks (constants) and the learnable refiner.
    Tensor raw(Tensor::zeros({B * L, 3}));
    for (std::size_t b = 0; b < B; ++b) {
        const MaskSet ms = build_masks(seqs[b], batch[b]->request, config_.masks,
                                       config_.ablation_n);
        for (std::size_t l = 0; l < L; ++l) {
            raw.at(b * L + l, 0) = ms.m_hour[l];
            raw.at(b * L + l, 1) = ms.m_week[l];
            raw.at(b * L + l, 2) = ms.m_geo[l];
        }
    }
    VarPtr refined = config_.ablation_n == MaskVariant::N3
                         ? constant(raw)
                         : refiner_.forward(constant(raw));
    Tensor valid_f = Tensor::zeros({B, L});
    for (std::size_t i = 0; i < B * L; ++i)
        valid_f.data[i] = valid[i] ? 1.0 : 0.0;
    std::vector<VarPtr> masks;  // [hour, week, geo], each [B, L]
    for (std::size_t m = 0; m < 3; ++m)
        masks.push_back(ops::mul_const(
            ops::reshape(ops::slice_cols(refined, m, 1), B, L), valid_f));

    // Queries per MoE ablation.
    std::vector<VarPtr> queries;
    if (config_.ablation_m == MoeVariant::M1) {
        queries.push_back(m1_query_.forward(x));
    } else {
        const std::vector<double> no_holiday(B, 0.0);
        const bool use_holiday = config_.ablation_m != MoeVariant::M2;
        const std::size_t de = e;
        QueryBundle bundle = moe_.forward(
            x, ops::slice_cols(x, 0, de), ops::slice_cols(x, de, 2 * de),
            ops::slice_cols(x, 3 * de, de), ops::slice_cols(x, 4 * de, 3 * de),
            use_holiday ? holiday : no_holiday);
        if (config_.ablation_m == MoeVariant::M4)
            queries = bundle.queries;
        else
            queries.push_back(bundle.queries[0]);
    }

    // HMIN pooling, material-major / query-minor.
    std::vector<VarPtr> outputs;
    for (const VarPtr& mask : masks)
        for (const VarPtr& q : queries)
            outputs.push_back(hmin_.attend(keys, q, mask, valid, B, L).output);
    return ops::concat_cols({spatio_temporal_concat(outputs), x});
}

StimModel::Output StimModel::forward(const std::vector<const Row*>& batch) {
    if (batch.empty()) throw DataError("forward: empty batch");
    Output out;
    VarPtr feat = features(batch, &out.empty_rows);
    if (config_.task == Task::Ctr || config_.task == Task::Both)
        out.yhat_ctr = head_ctr_.forward(feat);
    if (config_.task == Task::Ctcvr || config_.task == Task::Both)
        out.yhat_ctcvr = head_ctcvr_.forward(feat);
    return out;
}

VarPtr StimModel::loss(const Output& out, const std::vector<const Row*>& batch) const {
    std::vector<double> y_ctr(batch.size()), y_ctcvr(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        y_ctr[i] = batch[i]->label_ctr;
        y_ctcvr[i] = batch[i]->label_ctcvr;
    }
    if (config_.task == Task::Ctr) return ops::bce_loss(out.yhat_ctr, y_ctr);
    if (config_.task == Task::Ctcvr) return ops::bce_loss(out.yhat_ctcvr, y_ctcvr);
    return ops::scale(ops::add(ops::bce_loss(out.yhat_ctr, y_ctr),
                               ops::bce_loss(out.yhat_ctcvr, y_ctcvr)),
                      0.5);
}

double StimModel::train_step(const std::vector<const Row*>& batch,
                             Optimizer& optimizer) {
    params_.zero_grads();
    Output out = forward(batch);
    VarPtr l = loss(out, batch);
    const double value = l->value.data[0];
    if (!std::isfinite(value)) {
        std::ostringstream diag;
        diag << "non-finite loss " << value << ";";
        const VarPtr& yh = out.yhat_ctr ? out.yhat_ctr : out.yhat_ctcvr;
        for (std::size_t i = 0; i < batch.size(); ++i)
            if (!std::isfinite(yh->value.at(i, 0)))
                diag << " row " << i << " (user " << batch[i]->user_id
                     << ", item " << batch[i]->request.item_id
                     << ") yhat=" << yh->value.at(i, 0);
        throw TrainingError(diag.str());
    }
    backward(l);
    optimizer.step(params_);
    return value;
}

std::vector<double> StimModel::predict(const std::vector<const Row*>& batch,
                                       Task task) {
    Output out = forward(batch);
    const VarPtr& yh = task == Task::Ctcvr ? out.yhat_ctcvr : out.yhat_ctr;
    if (!yh)
        throw ConfigError("predict: model has no head for task " + to_string(task));
    std::vector<double> scores(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) scores[i] = yh->value.at(i, 0);
    return scores;
}

void StimModel::save(const std::string& path) const {
    save_checkpoint(path, params_, config_.to_json());
}

StimModel StimModel::load(const std::string& path) {
    StimModel model(ModelConfig::from_json(read_checkpoint_config(path)));
    load_checkpoint(path, model.params_);
    return model;
}

}  // namespace stim
