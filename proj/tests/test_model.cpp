#include <gtest/gtest.h>

#include "aimd/model.hpp"

using namespace aimd;

TEST(Model, KindNamesRoundTrip) {
  for (ExitKind k : kAllKinds) EXPECT_EQ(parse_kind(to_string(k)), k);
  EXPECT_THROW(parse_kind("sideways"), ValidationError);
}

TEST(Model, ParamsValidation) {
  EXPECT_NO_THROW(validate(ModelParams{1.0, 0.5, 1.0}));
  EXPECT_NO_THROW(validate(ModelParams{0.0, 0.5, 1.0}));
  EXPECT_THROW(validate(ModelParams{-1.0, 0.5, 1.0}), ValidationError);
  EXPECT_THROW(validate(ModelParams{1.0, 1.0, 1.0}), ValidationError);
  EXPECT_THROW(validate(ModelParams{1.0, 0.0, 1.0}), ValidationError);
  EXPECT_THROW(validate(ModelParams{1.0, 0.5, 0.0}), ValidationError);
  EXPECT_THROW(validate(ModelParams{std::nan(""), 0.5, 1.0}), ValidationError);
  EXPECT_THROW(validate(LaplaceArg{-0.1}), ValidationError);
}

TEST(Model, SpecOrderings) {
  ExitSpec s;
  s.kind = ExitKind::UpOne;
  s.x = 1;
  s.a = 2;
  EXPECT_NO_THROW(validate(s));
  s.x = 2;
  EXPECT_THROW(validate(s), ValidationError);

  ExitSpec t;
  t.kind = ExitKind::TwoSidedUp;
  t.b = 1;
  t.x = 1;
  t.a = 2;
  EXPECT_NO_THROW(validate(t));
  t.x = 0.5;
  EXPECT_THROW(validate(t), ValidationError);

  ExitSpec r;
  r.kind = ExitKind::ReflLowerUp;
  r.b = 1;
  r.x = 1.5;
  r.c = 3;
  EXPECT_NO_THROW(validate(r));
  r.c = 1.2;
  r.x = 1.5;
  EXPECT_THROW(validate(r), ValidationError);

  ExitSpec d;
  d.kind = ExitKind::Drawdown;
  d.x = 1.5;
  d.c = 1;
  d.xbar0 = 1.0;
  EXPECT_THROW(validate(d), ValidationError);

  ExitSpec u;
  u.kind = ExitKind::Drawup;
  u.x = 1.5;
  u.u = 2;
  u.c = 1;
  EXPECT_THROW(validate(u), ValidationError);
}

TEST(Model, NormalizationRescalesTime) {
  ExitSpec s;
  s.kind = ExitKind::UpOne;
  s.x = 0;
  s.a = 1;
  const NormalizedProblem np = normalize(ModelParams{2.0, 0.5, 4.0}, s, LaplaceArg{1.0});
  EXPECT_DOUBLE_EQ(np.params.lambda, 0.5);
  EXPECT_DOUBLE_EQ(np.params.beta, 1.0);
  EXPECT_DOUBLE_EQ(np.w.w, 0.25);
  EXPECT_DOUBLE_EQ(np.spec.a, 1.0);
  EXPECT_THROW(require_normalized(ModelParams{1.0, 0.5, 2.0}), ValidationError);
}
