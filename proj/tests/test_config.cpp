#include "av2t/config.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

namespace av2t {
namespace {

TEST(Config, DefaultsResolve) {
    const ResolvedConfig c = resolve(default_config());
    EXPECT_EQ(c.run.backend.kind, BackendKind::stub);
    EXPECT_EQ(c.run.model.d_shared, 8);
    EXPECT_EQ(c.run.model.activation, Activation::gelu);
    EXPECT_EQ(c.run.train.prompt_source, PromptSource::fused);
    EXPECT_TRUE(c.run.train.adapter_enabled);
    EXPECT_EQ(c.run.train.beta2, 1.0);
    EXPECT_EQ(c.run.train.threshold, 0.5);
    EXPECT_FALSE(c.run.model.adapter_layers.has_value());
    EXPECT_EQ(c.ablate.margin, 1.0);
    EXPECT_EQ(resolve(default_config(BackendKind::pretrained)).run.backend.kind, BackendKind::pretrained);
}

TEST(Config, RunConfigJsonRoundTrip) {
    RunConfig rc = resolve(default_config()).run;
    rc.model.adapter_layers = std::vector<int>{0, 2};
    rc.train.optimizer.lr = 3e-3;
    rc.model.adapter_tap = AdapterTap::text;
    EXPECT_EQ(to_json(run_config_from_json(to_json(rc))), to_json(rc));
}

TEST(Config, OverridesParseValues) {
    Json doc = default_config();
    apply_override(doc, "train.optimizer.lr=0.01");
    apply_override(doc, "train.adapter_enabled=false");
    apply_override(doc, "train.prompt_source=clip_only");
    apply_override(doc, "model.adapter_layers=[1,2]");
    apply_override(doc, "train.epochs=3");
    const RunConfig rc = resolve(doc).run;
    EXPECT_EQ(rc.train.optimizer.lr, 0.01);
    EXPECT_FALSE(rc.train.adapter_enabled);
    EXPECT_EQ(rc.train.prompt_source, PromptSource::clip_only);
    EXPECT_EQ(rc.model.adapter_layers, (std::vector<int>{1, 2}));
    EXPECT_EQ(rc.train.epochs, 3);
}

TEST(Config, UnknownKeysAndTypeChangesRejected) {
    Json doc = default_config();
    try {
        apply_override(doc, "train.learning_rate=1");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("train.learning_rate"), std::string::npos);
    }
    EXPECT_THROW(apply_override(doc, "train.adapter_enabled=3"), ConfigError);
    EXPECT_THROW(apply_override(doc, "train=1"), ConfigError);
    EXPECT_THROW(apply_override(doc, "novalue"), ConfigError);
    EXPECT_THROW(apply_override(doc, "train..lr=1"), ConfigError);
}

TEST(Config, InvalidValuesRejectedOnResolve) {
    Json doc = default_config();
    apply_override(doc, "train.epochs=0");
    EXPECT_THROW(resolve(doc), ConfigError);
    doc = default_config();
    apply_override(doc, "model.adapter_layers=some");
    EXPECT_THROW(resolve(doc), ConfigError);
    doc = default_config();
    apply_override(doc, "train.prompt_source=audio");
    EXPECT_THROW(resolve(doc), ConfigError);
}

TEST(Config, LayeringDefaultsFileOverrides) {
    test::TempDir dir;
    write_text_file(dir / "c.json", R"({"train": {"epochs": 7, "seed": 5}, "ablate": {"margin": 2.5}})");
    const ResolvedConfig c = load_config(BackendKind::stub, dir / "c.json", {"train.seed=9"});
    EXPECT_EQ(c.run.train.epochs, 7);
    EXPECT_EQ(c.run.train.seed, 9u);
    EXPECT_EQ(c.ablate.margin, 2.5);
    EXPECT_EQ(c.run.train.batch_size, 2);

    write_text_file(dir / "bad.json", R"({"train": {"epoch": 7}})");
    EXPECT_THROW(load_config(BackendKind::stub, dir / "bad.json", {}), ConfigError);
    write_text_file(dir / "junk.json", "{not json");
    EXPECT_THROW(load_config(BackendKind::stub, dir / "junk.json", {}), ConfigError);

    write_text_file(dir / "pre.json", R"({"backend": {"kind": "pretrained"}})");
    EXPECT_EQ(load_config(BackendKind::stub, dir / "pre.json", {}).run.backend.kind, BackendKind::pretrained);
}

}  // namespace
}  // namespace av2t
