"""gaitkin: lower-limb joint kinematics toolkit.

Turns 3D pose keypoints into smoothed joint-angle labels, trains a
dilated temporal convolutional network on 18-channel IMU streams to
regress four lower-limb joint angles, adapts a pre-trained model to
stiff-knee gait from a small labeled fraction, and serves the model in
a 50 Hz streaming loop.
"""

__version__ = "0.1.0"
