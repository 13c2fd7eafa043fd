from .action import ACTION_DIM, ActionConfig, apply_action
from .curriculum import CurriculumSchedule, curriculum_probs, draw_level
from .replay import Batch, ReplayBuffer
from .agent import (Policy, SacAgent, SacConfig, actor_loss_and_grads, alpha_loss_and_grad,
                    critic_loss_and_grads, soft_next_value, target_q)
