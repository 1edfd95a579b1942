#include <cmath>

#include "doctest.h"

#include "camworld/body_model.hpp"
#include "camworld/camera.hpp"
#include "camworld/rng.hpp"
#include "camworld/rotation.hpp"
#include "camworld/transform.hpp"
#include "test_helpers.hpp"

using namespace camworld;

TEST_CASE("parameter-level frame changes") {
  SUBCASE("zero pitch is the identity") {
    Rng rng(1);
    const BodyParams p = testing::random_params(rng, 8);
    const BodyParams w = camera_to_world(p, 0.0);
    CHECK(w.pose[0] == p.pose[0]);
    CHECK(w.translation == p.translation);
    const BodyParams c = world_to_camera(p, 0.0);
    CHECK(c.pose[0] == p.pose[0]);
  }

  SUBCASE("root matching the pitch rotation maps to upright") {
    const double pitch = deg_to_rad(30.0);
    BodyParams p = zero_params(8);
    p.pose[0] = matrix_to_axis_angle(pitch_rotation(pitch));
    const BodyParams w = camera_to_world(p, pitch);
    CHECK(w.pose[0].norm() < 1e-9);
  }

  SUBCASE("upright world body gains the pitch rotation in camera frame") {
    const double pitch = deg_to_rad(25.0);
    const BodyParams c = world_to_camera(zero_params(8), pitch);
    CHECK((c.pose[0] - matrix_to_axis_angle(pitch_rotation(pitch))).norm() < 1e-12);
  }

  SUBCASE("round trip is the identity") {
    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
      const BodyParams p = testing::random_params(rng, 8);
      const double pitch = rng.uniform(deg_to_rad(-60.0), deg_to_rad(60.0));
      const BodyParams back = world_to_camera(camera_to_world(p, pitch), pitch);
      CHECK((back.pose[0] - p.pose[0]).norm() < 1e-9);
      CHECK((back.translation - p.translation).norm() < 1e-9);
      for (size_t k = 1; k < p.pose.size(); ++k) CHECK(back.pose[k] == p.pose[k]);
      CHECK(back.shape == p.shape);
    }
  }
}

TEST_CASE("mesh-level frame changes") {
  const BodyModelSpec spec = toy_body_spec();

  SUBCASE("zero pitch leaves the mesh unchanged") {
    Rng rng(3);
    const Mesh mesh = lbs_forward(spec, testing::random_params(rng, spec.joint_count()));
    const Mesh moved = transform_mesh(mesh, 0.0, Direction::kCameraToWorld);
    CHECK((moved.vertices - mesh.vertices).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("single vertex under 30 degrees camera-to-world") {
    Mesh mesh;
    mesh.vertices.resize(1, 3);
    mesh.vertices << 0.0, 0.0, 1.0;
    mesh.joints.resize(0, 3);
    const Mesh moved = transform_mesh(mesh, deg_to_rad(30.0), Direction::kCameraToWorld);
    CHECK(moved.vertices(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(moved.vertices(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(moved.vertices(0, 2) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
  }

  SUBCASE("round trip is the identity") {
    Rng rng(4);
    const Mesh mesh = lbs_forward(spec, testing::random_params(rng, spec.joint_count()));
    for (int t = 0; t < 20; ++t) {
      const double pitch = rng.uniform(-1.0, 1.0);
      const Mesh back = transform_mesh(transform_mesh(mesh, pitch, Direction::kCameraToWorld),
                                       pitch, Direction::kWorldToCamera);
      CHECK((back.vertices - mesh.vertices).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((back.joints - mesh.joints).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("parameter-level matches vertex-level transforms") {
  const BodyModelSpec spec = toy_body_spec();
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    BodyParams p = testing::random_params(rng, spec.joint_count());
    const double pitch = rng.uniform(deg_to_rad(-50.0), deg_to_rad(50.0));

    {
      BodyParams p_zero_t = p;
      p_zero_t.translation.setZero();
      const Mesh via_mesh = transform_mesh(lbs_forward(spec, p_zero_t), pitch,
                                           Direction::kCameraToWorld);
      const Mesh via_params = lbs_forward(spec, camera_to_world(p_zero_t, pitch));
      CHECK((via_mesh.vertices - via_params.vertices).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((via_mesh.joints - via_params.joints).cwiseAbs().maxCoeff() < 1e-8);
    }
    {
      // With the toy body's origin-pinned root the equality extends to
      // arbitrary translations.
      const Mesh via_mesh = transform_mesh(lbs_forward(spec, p), pitch,
                                           Direction::kCameraToWorld);
      const Mesh via_params = lbs_forward(spec, camera_to_world(p, pitch));
      CHECK((via_mesh.vertices - via_params.vertices).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("uprightness restoration under a known pitch") {
  const BodyModelSpec spec = toy_body_spec();
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const double pitch = rng.uniform(deg_to_rad(5.0), deg_to_rad(45.0));
    BodyParams world = testing::random_params(rng, spec.joint_count());
    world.pose[0].setZero();  // upright
    world.translation = Eigen::Vector3d(0.0, 0.0, 3.0);

    const BodyParams cam = world_to_camera(world, pitch);
    const double naive_err = geodesic_angle(Eigen::Matrix3d::Identity(),
                                            axis_angle_to_matrix(cam.pose[0]));
    CHECK(naive_err == doctest::Approx(pitch).epsilon(1e-9));

    const BodyParams restored = camera_to_world(cam, pitch);
    const double restored_err = geodesic_angle(Eigen::Matrix3d::Identity(),
                                               axis_angle_to_matrix(restored.pose[0]));
    CHECK(restored_err < 1e-9);
  }
}
