"""이중 역할 네트워크(DRN) 학습 패키지."""

from .augment import AugmentConfig, augment_pair
from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import GRADCHECK_TARGETS, GradcheckReport, run_gradcheck
from .losses import LossBreakdown, alt_divergence, total_loss
from .net import NetworkSpec, backward, forward, init_params
from .schedules import lr_schedule, ramp, wd_schedule
from .trainer import DualState, EpochRecord, TrainConfig, ema_update, evaluate, train
