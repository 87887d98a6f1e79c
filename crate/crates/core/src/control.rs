//! Assistance strategies over the left/right grounded-chain gravity models.
//!
//! The exoskeleton is treated as a planar serial chain rooted at the
//! grounded ankle, with point masses at link midpoints. The three switching
//! strategies mix the two chain models: hard switching (FSM), first-order
//! smoothed switching (sFSM), and continuous phase-based blending.

use crate::error::{Error, Result};
use crate::estimators::threshold_classify;
use crate::gait::{JointAngles, PhaseLabel, JOINT_COUNT};

/// Which foot the serial chain is rooted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grounded {
    /// Left grounded foot: left single stance, right leg swinging.
    Left,
    /// Right grounded foot.
    Right,
}

/// Link lengths (m), masses (kg) and gravity of the exoskeleton.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExoParams {
    pub foot: f64,
    pub shank: f64,
    pub thigh: f64,
    pub torso: f64,
    pub m_foot: f64,
    pub m_shank: f64,
    pub m_thigh: f64,
    pub m_torso: f64,
    pub g: f64,
}

impl Default for ExoParams {
    /// Nameplate link table of the device.
    fn default() -> Self {
        ExoParams {
            foot: 0.095,
            shank: 0.402,
            thigh: 0.407,
            torso: 0.474,
            m_foot: 0.2,
            m_shank: 2.9,
            m_thigh: 4.1,
            m_torso: 1.2,
            g: 9.81,
        }
    }
}

/// Feed-forward joint torques, N·m, in [`JointAngles`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorqueCommand(pub [f64; JOINT_COUNT]);

impl TorqueCommand {
    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Mixing weights of the two grounded-chain outputs; always a partition of
/// unity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendWeights {
    pub w_lgf: f64,
    pub w_rgf: f64,
}

impl BlendWeights {
    /// Builds from the left-chain weight, clamped to [0, 1].
    pub fn from_lgf(w_lgf: f64) -> Self {
        let w = w_lgf.clamp(0.0, 1.0);
        BlendWeights {
            w_lgf: w,
            w_rgf: 1.0 - w,
        }
    }
}

/// Gravity statics of the grounded serial chain.
///
/// Chain traversal runs from the grounded ankle up that leg, across the
/// torso link, and down the swinging leg to its foot. The torque at each
/// joint is gravity times the summed moment of all distal link masses about
/// it, with links modeled as point masses at their midpoints.
pub fn gravity_torques(params: &ExoParams, angles: &JointAngles, grounded: Grounded) -> TorqueCommand {
    // Joint traversal order as indices into the angle vector
    // [lh, lk, la, rh, rk, ra].
    let joint_order: [usize; 6] = match grounded {
        Grounded::Left => [2, 1, 0, 3, 4, 5],
        Grounded::Right => [5, 4, 3, 0, 1, 2],
    };
    // Link after each joint: stance shank, stance thigh, torso, swing
    // thigh, swing shank, swing foot. The first three ascend, the rest
    // descend.
    let lengths = [
        params.shank,
        params.thigh,
        params.torso,
        params.thigh,
        params.shank,
        params.foot,
    ];
    let masses = [
        params.m_shank,
        params.m_thigh,
        params.m_torso,
        params.m_thigh,
        params.m_shank,
        params.m_foot,
    ];
    let ascend = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0];

    // Planar statics about z: only horizontal positions matter.
    let mut joint_x = [0.0f64; 6];
    let mut com_x = [0.0f64; 6];
    let mut x = 0.0;
    let mut heading = 0.0;
    for i in 0..6 {
        heading += angles[joint_order[i]];
        let dx = ascend[i] * heading.sin();
        joint_x[i] = x;
        com_x[i] = x + 0.5 * lengths[i] * dx;
        x += lengths[i] * dx;
    }

    let mut out = [0.0f64; 6];
    for i in 0..6 {
        let mut moment = 0.0;
        for l in i..6 {
            moment += masses[l] * (com_x[l] - joint_x[i]);
        }
        out[joint_order[i]] = params.g * moment;
    }
    TorqueCommand(out)
}

/// Continuous blend weights from a phase value in [-1, 1].
///
/// The left chain serves left single stance (phase -1), so
/// `w_lgf = (1 - phi) / 2` and `w_rgf = (1 + phi) / 2`. Out-of-range phases
/// are clamped and logged.
pub fn phase_to_blend(phi: f64) -> BlendWeights {
    if !(-1.0..=1.0).contains(&phi) {
        // Saturated estimators spill over the range by a hair every tick;
        // only a real excursion deserves a warning.
        if phi.abs() > 1.05 {
            log::warn!("blend phase {phi} outside [-1, 1], clamping");
        } else {
            log::debug!("blend phase {phi} outside [-1, 1], clamping");
        }
    }
    let phi = phi.clamp(-1.0, 1.0);
    BlendWeights {
        w_lgf: (1.0 - phi) / 2.0,
        w_rgf: (1.0 + phi) / 2.0,
    }
}

/// Assistance switching strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Instantaneous switch between the grounded-chain outputs.
    Fsm,
    /// FSM selection low-pass filtered with a fixed time constant.
    SmoothedFsm,
    /// Continuous weighting of both outputs from the phase value.
    Blend,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Fsm, Strategy::SmoothedFsm, Strategy::Blend];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Fsm => "fsm",
            Strategy::SmoothedFsm => "sfsm",
            Strategy::Blend => "blend",
        }
    }
}

/// Controller tuning shared by the strategies.
#[derive(Debug, Clone, Copy)]
pub struct ControllerConfig {
    /// Threshold of the stance decision driving FSM switching.
    pub theta: f64,
    /// Time constant of the sFSM smoothing filter, seconds.
    pub tau: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            theta: crate::estimators::DEFAULT_THETA,
            tau: 0.2,
        }
    }
}

/// One assistance controller instance; owns its switching/filter state.
#[derive(Debug, Clone)]
pub struct Controller {
    strategy: Strategy,
    config: ControllerConfig,
    params: ExoParams,
    /// Last single-stance selection; double stance holds it.
    selected: Grounded,
    /// Filtered left-chain weight (sFSM only).
    filtered_lgf: f64,
}

impl Controller {
    pub fn new(strategy: Strategy, config: ControllerConfig, params: ExoParams) -> Self {
        Controller {
            strategy,
            config,
            params,
            selected: Grounded::Left,
            filtered_lgf: 1.0,
        }
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// Advances one control tick: picks blend weights from the phase value
    /// and mixes the two gravity models. Deterministic in (state, inputs).
    pub fn step(&mut self, phi: f64, angles: &JointAngles, dt: f64) -> (TorqueCommand, BlendWeights) {
        debug_assert!(dt > 0.0, "control tick needs positive dt");
        let weights = match self.strategy {
            Strategy::Fsm => BlendWeights::from_lgf(self.fsm_target(phi)),
            Strategy::SmoothedFsm => {
                let target = self.fsm_target(phi);
                // Exact first-order response over one tick.
                let alpha = 1.0 - (-dt / self.config.tau).exp();
                self.filtered_lgf += (target - self.filtered_lgf) * alpha;
                self.filtered_lgf = self.filtered_lgf.clamp(0.0, 1.0);
                BlendWeights::from_lgf(self.filtered_lgf)
            }
            Strategy::Blend => phase_to_blend(phi),
        };
        let lgf = gravity_torques(&self.params, angles, Grounded::Left);
        let rgf = gravity_torques(&self.params, angles, Grounded::Right);
        let mut torque = [0.0; JOINT_COUNT];
        for j in 0..JOINT_COUNT {
            torque[j] = weights.w_lgf * lgf.0[j] + weights.w_rgf * rgf.0[j];
        }
        (TorqueCommand(torque), weights)
    }

    /// FSM selection: sign of the thresholded phase; double stance holds
    /// the previous selection. Returns the target left-chain weight.
    fn fsm_target(&mut self, phi: f64) -> f64 {
        match threshold_classify(phi, self.config.theta).label {
            PhaseLabel::Left => self.selected = Grounded::Left,
            PhaseLabel::Right => self.selected = Grounded::Right,
            PhaseLabel::Double => {}
        }
        match self.selected {
            Grounded::Left => 1.0,
            Grounded::Right => 0.0,
        }
    }
}

/// Largest and mean per-tick torque jump of a trace, infinity norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discontinuity {
    pub max_jump: f64,
    pub mean_jump: f64,
}

/// Quantifies switching discontinuities over a torque trace.
pub fn discontinuity_metric(trace: &[TorqueCommand]) -> Result<Discontinuity> {
    if trace.len() < 2 {
        return Err(Error::Contract(format!(
            "discontinuity metric needs at least 2 ticks, got {}",
            trace.len()
        )));
    }
    let mut max_jump = 0.0f64;
    let mut total = 0.0f64;
    for w in trace.windows(2) {
        let jump = w[0]
            .0
            .iter()
            .zip(&w[1].0)
            .map(|(a, b)| (b - a).abs())
            .fold(0.0f64, f64::max);
        max_jump = max_jump.max(jump);
        total += jump;
    }
    Ok(Discontinuity {
        max_jump,
        mean_jump: total / (trace.len() - 1) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertical_configuration_has_zero_torque() {
        let params = ExoParams::default();
        for grounded in [Grounded::Left, Grounded::Right] {
            let tau = gravity_torques(&params, &[0.0; 6], grounded);
            for v in tau.0 {
                assert!(v.abs() < 1e-12, "torque {v} in vertical pose");
            }
        }
    }

    #[test]
    fn mirrored_configuration_swaps_torque_blocks() {
        let params = ExoParams::default();
        let angles = [0.3, -0.2, 0.1, -0.4, 0.25, -0.05];
        let mirrored = [-0.4, 0.25, -0.05, 0.3, -0.2, 0.1];
        let left = gravity_torques(&params, &angles, Grounded::Left);
        let right = gravity_torques(&params, &mirrored, Grounded::Right);
        for j in 0..3 {
            assert!((left.0[j] - right.0[j + 3]).abs() < 1e-12);
            assert!((left.0[j + 3] - right.0[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn single_link_statics_match_hand_calculation() {
        // Only the thigh links have mass. The stance thigh is horizontal;
        // the torso folds back so the swing hip sits at x = 0 and the whole
        // swing leg hangs vertically there, leaving the stance thigh as the
        // one loaded link: root torque = m * g * a / 2.
        use std::f64::consts::FRAC_PI_2;
        let params = ExoParams {
            m_foot: 0.0,
            m_shank: 0.0,
            m_torso: 0.0,
            ..ExoParams::default()
        };
        let torso_heading = (-params.thigh / params.torso).asin();
        let angles = [
            torso_heading - FRAC_PI_2, // lh: fold torso back over the hip
            FRAC_PI_2,                 // lk: stance thigh horizontal
            0.0,                       // la: stance shank vertical
            -torso_heading,            // rh: swing thigh vertical
            0.0,
            0.0,
        ];
        let tau = gravity_torques(&params, &angles, Grounded::Left);
        let expected = 4.1 * 9.81 * 0.407 / 2.0;
        let ankle = tau.0[2];
        assert!(
            (ankle - expected).abs() <= 1e-6 * expected,
            "ankle torque {ankle} vs hand value {expected}"
        );
    }

    #[test]
    fn phase_to_blend_endpoints_and_midpoint() {
        let w = phase_to_blend(-1.0);
        assert_eq!((w.w_lgf, w.w_rgf), (1.0, 0.0));
        let w = phase_to_blend(0.0);
        assert_eq!((w.w_lgf, w.w_rgf), (0.5, 0.5));
        let w = phase_to_blend(1.0);
        assert_eq!((w.w_lgf, w.w_rgf), (0.0, 1.0));
        // Out of range input clamps.
        let w = phase_to_blend(3.0);
        assert_eq!((w.w_lgf, w.w_rgf), (0.0, 1.0));
    }

    #[test]
    fn blend_weights_partition_unity() {
        for i in 0..=1000 {
            let phi = -1.0 + 2.0 * i as f64 / 1000.0;
            let w = phase_to_blend(phi);
            assert!((w.w_lgf + w.w_rgf - 1.0).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&w.w_lgf));
        }
    }

    #[test]
    fn blend_at_minus_one_equals_fsm_locked_on_lgf() {
        let params = ExoParams::default();
        let angles = [0.2, 0.4, -0.1, 0.15, 0.55, 0.0];
        let mut fsm = Controller::new(Strategy::Fsm, ControllerConfig::default(), params);
        let mut blend = Controller::new(Strategy::Blend, ControllerConfig::default(), params);
        for _ in 0..10 {
            let (tf, _) = fsm.step(-1.0, &angles, 0.01);
            let (tb, _) = blend.step(-1.0, &angles, 0.01);
            for j in 0..6 {
                assert!((tf.0[j] - tb.0[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sfsm_jump_is_bounded_by_filter_response() {
        let params = ExoParams::default();
        let angles = [0.2, 0.4, -0.1, 0.15, 0.55, 0.0];
        let config = ControllerConfig::default();
        let dt = 0.01;

        let mut fsm = Controller::new(Strategy::Fsm, config, params);
        let mut sfsm = Controller::new(Strategy::SmoothedFsm, config, params);
        let mut fsm_trace = Vec::new();
        let mut sfsm_trace = Vec::new();
        for tick in 0..100 {
            let phi = if tick < 50 { -1.0 } else { 1.0 };
            fsm_trace.push(fsm.step(phi, &angles, dt).0);
            sfsm_trace.push(sfsm.step(phi, &angles, dt).0);
        }
        let fsm_jump = discontinuity_metric(&fsm_trace).unwrap().max_jump;
        let sfsm_jump = discontinuity_metric(&sfsm_trace).unwrap().max_jump;
        assert!(fsm_jump > 0.0);
        let alpha = 1.0 - (-dt / config.tau).exp();
        assert!(
            sfsm_jump <= fsm_jump * alpha + 1e-9,
            "sFSM jump {sfsm_jump} above filter bound {}",
            fsm_jump * alpha
        );
    }

    #[test]
    fn sfsm_with_vanishing_tau_matches_fsm() {
        let params = ExoParams::default();
        let angles = [0.1, 0.3, 0.05, 0.25, 0.45, -0.1];
        let config = ControllerConfig {
            tau: 1e-12,
            ..ControllerConfig::default()
        };
        let mut fsm = Controller::new(Strategy::Fsm, config, params);
        let mut sfsm = Controller::new(Strategy::SmoothedFsm, config, params);
        for tick in 0..60 {
            let phi = [-1.0, 0.0, 1.0][(tick / 10) % 3];
            let (tf, _) = fsm.step(phi, &angles, 0.01);
            let (ts, _) = sfsm.step(phi, &angles, 0.01);
            for j in 0..6 {
                assert!((tf.0[j] - ts.0[j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn blend_torque_is_bilinear_in_model_outputs() {
        let params = ExoParams::default();
        let angles = [0.3, 0.6, -0.1, 0.1, 0.4, 0.2];
        let lgf = gravity_torques(&params, &angles, Grounded::Left);
        let rgf = gravity_torques(&params, &angles, Grounded::Right);
        let mut blend = Controller::new(Strategy::Blend, ControllerConfig::default(), params);
        let (torque, w) = blend.step(0.3, &angles, 0.01);
        for j in 0..6 {
            let expected = w.w_lgf * lgf.0[j] + w.w_rgf * rgf.0[j];
            assert_eq!(torque.0[j], expected);
        }
    }

    #[test]
    fn discontinuity_metric_hand_cases() {
        let zero = TorqueCommand([0.0; 6]);
        let constant = vec![zero; 5];
        let d = discontinuity_metric(&constant).unwrap();
        assert_eq!((d.max_jump, d.mean_jump), (0.0, 0.0));

        let mut stepped = [0.0; 6];
        stepped[3] = 2.0;
        let trace = vec![zero, zero, TorqueCommand(stepped), TorqueCommand(stepped)];
        let d = discontinuity_metric(&trace).unwrap();
        assert_eq!(d.max_jump, 2.0);
        assert!((d.mean_jump - 2.0 / 3.0).abs() < 1e-12);

        assert!(discontinuity_metric(&[zero]).is_err());
    }

    #[test]
    fn fsm_holds_selection_through_double_stance() {
        let params = ExoParams::default();
        let angles = [0.2, 0.4, -0.1, 0.15, 0.55, 0.0];
        let mut fsm = Controller::new(Strategy::Fsm, ControllerConfig::default(), params);
        let (_, w) = fsm.step(1.0, &angles, 0.01);
        assert_eq!(w.w_rgf, 1.0);
        // Double stance: selection stays on the right chain.
        let (_, w) = fsm.step(0.0, &angles, 0.01);
        assert_eq!(w.w_rgf, 1.0);
        let (_, w) = fsm.step(-1.0, &angles, 0.01);
        assert_eq!(w.w_lgf, 1.0);
    }
}
