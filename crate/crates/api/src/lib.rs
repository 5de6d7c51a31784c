//! Wire types and a thin blocking client for the affordance service.

pub mod types;

use std::time::Duration;

use thiserror::Error;

use types::*;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),
    #[error("service returned {status}: {message}")]
    Api { status: u16, message: String },
    #[error("timed out waiting for experiment {0}")]
    WaitTimeout(u64),
}

/// Blocking HTTP client for one service instance.
pub struct ServiceClient {
    base: String,
    http: reqwest::blocking::Client,
}

impl ServiceClient {
    /// `base` is e.g. `http://127.0.0.1:7878`.
    pub fn new(base: impl Into<String>) -> Self {
        let base = base.into();
        let base = base.trim_end_matches('/').to_string();
        ServiceClient {
            base,
            http: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(600))
                .build()
                .expect("client construction"),
        }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    fn decode<T: serde::de::DeserializeOwned>(
        response: reqwest::blocking::Response,
    ) -> Result<T, ClientError> {
        let status = response.status();
        if status.is_success() {
            return Ok(response.json()?);
        }
        let message = response
            .json::<ErrorBody>()
            .map(|b| b.error)
            .unwrap_or_else(|_| status.to_string());
        Err(ClientError::Api {
            status: status.as_u16(),
            message,
        })
    }

    fn post<B: serde::Serialize, T: serde::de::DeserializeOwned>(
        &self,
        path: &str,
        body: &B,
    ) -> Result<T, ClientError> {
        Self::decode(self.http.post(self.url(path)).json(body).send()?)
    }

    fn get<T: serde::de::DeserializeOwned>(&self, path: &str) -> Result<T, ClientError> {
        Self::decode(self.http.get(self.url(path)).send()?)
    }

    pub fn health(&self) -> Result<Health, ClientError> {
        self.get("/healthz")
    }

    pub fn create_store(&self, spec: &StoreSpec) -> Result<StoreInfo, ClientError> {
        self.post("/api/v1/stores", spec)
    }

    pub fn list_stores(&self) -> Result<Vec<StoreInfo>, ClientError> {
        self.get("/api/v1/stores")
    }

    pub fn affordances(
        &self,
        store: u64,
        request: &AffordancesRequest,
    ) -> Result<AffordancesResponse, ClientError> {
        self.post(&format!("/api/v1/stores/{store}/affordances"), request)
    }

    pub fn manipulability(
        &self,
        store: u64,
        request: &ManipulabilityRequest,
    ) -> Result<ManipulabilityResponse, ClientError> {
        self.post(&format!("/api/v1/stores/{store}/manipulability"), request)
    }

    pub fn project2d(
        &self,
        store: u64,
        request: &Project2dRequest,
    ) -> Result<Project2dResponse, ClientError> {
        self.post(&format!("/api/v1/stores/{store}/project2d"), request)
    }

    pub fn cooc_build(&self, request: &CoocBuildRequest) -> Result<CoocBuildResponse, ClientError> {
        self.post("/api/v1/cooc/build", request)
    }

    pub fn capable_of(&self, request: &CapableOfRequest) -> Result<CapableOfResponse, ClientError> {
        self.post("/api/v1/conceptnet/capableof", request)
    }

    pub fn submit_experiment(&self, config: &ExperimentConfig) -> Result<u64, ClientError> {
        let submitted: ExperimentSubmitted = self.post("/api/v1/experiments", config)?;
        Ok(submitted.id)
    }

    pub fn experiment_status(&self, id: u64) -> Result<ExperimentStatus, ClientError> {
        self.get(&format!("/api/v1/experiments/{id}"))
    }

    /// Poll until the experiment completes or fails.
    pub fn wait_experiment(
        &self,
        id: u64,
        timeout: Duration,
    ) -> Result<ExperimentStatus, ClientError> {
        let deadline = std::time::Instant::now() + timeout;
        loop {
            let status = self.experiment_status(id)?;
            match status.state {
                ExperimentState::Completed | ExperimentState::Failed => return Ok(status),
                _ if std::time::Instant::now() > deadline => {
                    return Err(ClientError::WaitTimeout(id))
                }
                _ => std::thread::sleep(Duration::from_millis(100)),
            }
        }
    }

    pub fn replay(&self, request: &ReplayRequest) -> Result<ReplayTranscript, ClientError> {
        self.post("/api/v1/replay", request)
    }

    pub fn env_create(&self, request: &EnvCreateRequest) -> Result<EnvCreated, ClientError> {
        self.post("/api/v1/envs", request)
    }

    pub fn env_step(&self, id: u64, command: &str) -> Result<EnvObservation, ClientError> {
        self.post(
            &format!("/api/v1/envs/{id}/step"),
            &EnvStepRequest {
                command: command.to_string(),
            },
        )
    }

    pub fn env_reset(&self, id: u64) -> Result<EnvObservation, ClientError> {
        self.post(&format!("/api/v1/envs/{id}/reset"), &serde_json::json!({}))
    }

    pub fn env_delete(&self, id: u64) -> Result<(), ClientError> {
        let response = self
            .http
            .delete(self.url(&format!("/api/v1/envs/{id}")))
            .send()?;
        if response.status().is_success() {
            Ok(())
        } else {
            let status = response.status();
            let message = response
                .json::<ErrorBody>()
                .map(|b| b.error)
                .unwrap_or_else(|_| status.to_string());
            Err(ClientError::Api {
                status: status.as_u16(),
                message,
            })
        }
    }
}
