from .bvh import (BvhError, Frame, Joint, MotionClip, Skeleton,
                  euler_to_quat, forward_kinematics, parse_bvh, quat_mul,
                  quat_rotate, quat_to_euler, serialize_bvh, swap_y_up)
from .dataset import MotionDataset
from .planar import (MIN_SPAN, PLANAR_RATE, PlanarClip, PlanarFrame,
                     central_differences, frame_at, load_annotations,
                     load_planar, make_clip, mirror_clip, project_sagittal,
                     save_planar)
from .retarget import (KeypointMap, RetargetConfig, RetargetError,
                       RetargetReport, RobotMorphology, closed_form_ik,
                       retarget_clip, robot_frame, robot_skeleton, two_link_ik)
from .synthetic import (bundled_clips, highstep_clip, squat_clip, stand_clip,
                        walk_clip)

__all__ = [
    "BvhError", "Frame", "Joint", "MotionClip", "Skeleton", "euler_to_quat",
    "forward_kinematics", "parse_bvh", "quat_mul", "quat_rotate",
    "quat_to_euler", "serialize_bvh", "swap_y_up",
    "MotionDataset",
    "MIN_SPAN", "PLANAR_RATE", "PlanarClip", "PlanarFrame",
    "central_differences", "frame_at", "load_annotations", "load_planar",
    "make_clip", "mirror_clip", "project_sagittal", "save_planar",
    "KeypointMap", "RetargetConfig", "RetargetError", "RetargetReport",
    "RobotMorphology", "closed_form_ik", "retarget_clip", "robot_frame",
    "robot_skeleton", "two_link_ik",
    "bundled_clips", "highstep_clip", "squat_clip", "stand_clip", "walk_clip",
]
