//! Mark distributions, the sampled process, scaling schedules and the
//! closed-form constants.

mod constants;
mod law;
mod process;

pub use constants::{
    alpha, closed_form_g, constant_c0, constant_cdky, default_zeta, gamma_half, limit_probability, scaling_radius,
    theta, ScalingSchedule, ScheduleVariant,
};
pub use law::RadiusLaw;
pub use process::{extend_process, sample_process, MarkedPointSet, RngStream};
