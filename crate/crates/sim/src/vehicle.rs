use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VehicleId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleClass {
    Passenger,
    Truck,
}

impl VehicleClass {
    pub fn tag(self) -> u8 {
        match self {
            VehicleClass::Passenger => 0,
            VehicleClass::Truck => 1,
        }
    }
}

/// Origin-destination through the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Enters on the upstream mainline, leaves at the downstream end.
    MainMain,
    /// Enters on the upstream mainline, leaves via the off-ramp.
    MainOff,
    /// Enters on the on-ramp, merges, leaves at the downstream end.
    OnMain,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::MainMain, Route::MainOff, Route::OnMain];

    pub fn tag(self) -> u8 {
        match self {
            Route::MainMain => 0,
            Route::MainOff => 1,
            Route::OnMain => 2,
        }
    }
}

/// One simulated vehicle. `pos` is the front-bumper coordinate along its
/// current lane (mainline or ramp frame); the body occupies `[pos - length, pos]`.
#[derive(Debug, Clone)]
pub struct Vehicle {
    pub id: VehicleId,
    pub class: VehicleClass,
    pub route: Route,
    pub pos: f64,
    pub prev_pos: f64,
    pub speed: f64,
    /// Realized acceleration over the last step, (v_new - v_old) / dt.
    pub accel: f64,
    pub length: f64,
    pub entry_time: f64,
    /// Steps until the next lane change is allowed.
    pub lc_cooldown: u32,
}

impl Vehicle {
    /// Rear-bumper coordinate.
    pub fn rear(&self) -> f64 {
        self.pos - self.length
    }
}
