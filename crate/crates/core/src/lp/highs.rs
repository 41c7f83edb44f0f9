use std::ffi::{c_void, CString};
use std::os::raw::c_int;

use highs_sys::*;

use super::{LpBackend, LpError, LpStatus};

/// Thin owner of a HiGHS instance configured for silent dual-simplex solves.
pub struct HighsBackend {
    ptr: *mut c_void,
    ncols: usize,
    nrows: usize,
}

// The handle is owned exclusively and never aliased.
unsafe impl Send for HighsBackend {}

impl HighsBackend {
    pub fn new() -> Self {
        let ptr = unsafe { Highs_create() };
        assert!(!ptr.is_null(), "Highs_create returned null");
        let mut b = HighsBackend { ptr, ncols: 0, nrows: 0 };
        b.set_bool("output_flag", false);
        b.set_string("presolve", "off");
        b.set_string("solver", "simplex");
        unsafe {
            Highs_changeObjectiveSense(b.ptr, kHighsObjSenseMaximize as c_int);
        }
        b
    }

    fn set_bool(&mut self, key: &str, v: bool) {
        let k = CString::new(key).unwrap();
        unsafe {
            Highs_setBoolOptionValue(self.ptr, k.as_ptr(), v as c_int);
        }
    }

    fn set_string(&mut self, key: &str, v: &str) {
        let k = CString::new(key).unwrap();
        let v = CString::new(v).unwrap();
        unsafe {
            Highs_setStringOptionValue(self.ptr, k.as_ptr(), v.as_ptr());
        }
    }

    fn check(status: c_int, what: &str) -> Result<(), LpError> {
        if status == kHighsStatusError as c_int {
            Err(LpError::Backend(format!("{what} failed")))
        } else {
            Ok(())
        }
    }
}

impl Default for HighsBackend {
    fn default() -> Self {
        Self::new()
    }
}

impl Drop for HighsBackend {
    fn drop(&mut self) {
        unsafe { Highs_destroy(self.ptr) }
    }
}

fn bound(v: f64) -> f64 {
    if v.is_infinite() {
        if v > 0.0 {
            1e30
        } else {
            -1e30
        }
    } else {
        v
    }
}

impl LpBackend for HighsBackend {
    fn add_col(&mut self, cost: f64, lb: f64, ub: f64, entries: &[(usize, f64)]) -> Result<(), LpError> {
        let idx: Vec<c_int> = entries.iter().map(|&(r, _)| r as c_int).collect();
        let val: Vec<f64> = entries.iter().map(|&(_, v)| v).collect();
        let st = unsafe {
            Highs_addCol(self.ptr, cost, bound(lb), bound(ub), idx.len() as c_int, idx.as_ptr(), val.as_ptr())
        };
        Self::check(st, "addCol")?;
        self.ncols += 1;
        Ok(())
    }

    fn add_row(&mut self, lb: f64, ub: f64, entries: &[(usize, f64)]) -> Result<(), LpError> {
        let idx: Vec<c_int> = entries.iter().map(|&(c, _)| c as c_int).collect();
        let val: Vec<f64> = entries.iter().map(|&(_, v)| v).collect();
        let st = unsafe { Highs_addRow(self.ptr, bound(lb), bound(ub), idx.len() as c_int, idx.as_ptr(), val.as_ptr()) };
        Self::check(st, "addRow")?;
        self.nrows += 1;
        Ok(())
    }

    fn delete_rows(&mut self, rows: &[usize]) -> Result<(), LpError> {
        if rows.is_empty() {
            return Ok(());
        }
        let mut set: Vec<c_int> = rows.iter().map(|&r| r as c_int).collect();
        set.sort_unstable();
        let st = unsafe { Highs_deleteRowsBySet(self.ptr, set.len() as c_int, set.as_ptr()) };
        Self::check(st, "deleteRowsBySet")?;
        self.nrows -= set.len();
        Ok(())
    }

    fn delete_cols(&mut self, cols: &[usize]) -> Result<(), LpError> {
        if cols.is_empty() {
            return Ok(());
        }
        let mut set: Vec<c_int> = cols.iter().map(|&c| c as c_int).collect();
        set.sort_unstable();
        let st = unsafe { Highs_deleteColsBySet(self.ptr, set.len() as c_int, set.as_ptr()) };
        Self::check(st, "deleteColsBySet")?;
        self.ncols -= set.len();
        Ok(())
    }

    fn set_col_bounds(&mut self, col: usize, lb: f64, ub: f64) -> Result<(), LpError> {
        let st = unsafe { Highs_changeColBounds(self.ptr, col as c_int, bound(lb), bound(ub)) };
        Self::check(st, "changeColBounds")
    }

    fn set_col_cost(&mut self, col: usize, cost: f64) -> Result<(), LpError> {
        let st = unsafe { Highs_changeColCost(self.ptr, col as c_int, cost) };
        Self::check(st, "changeColCost")
    }

    fn solve(&mut self) -> Result<LpStatus, LpError> {
        let st = unsafe { Highs_run(self.ptr) };
        let model = unsafe { Highs_getModelStatus(self.ptr) };
        if model == kHighsModelStatusOptimal as c_int {
            return Ok(LpStatus::Optimal);
        }
        if model == kHighsModelStatusInfeasible as c_int {
            return Ok(LpStatus::Infeasible);
        }
        if model == kHighsModelStatusUnboundedOrInfeasible as c_int {
            // All columns are bounded, so the model cannot be unbounded.
            return Ok(LpStatus::Infeasible);
        }
        Err(LpError::Backend(format!("HiGHS run status {st}, model status {model}")))
    }

    fn solution(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut col_value = vec![0.0; self.ncols];
        let mut col_dual = vec![0.0; self.ncols];
        let mut row_value = vec![0.0; self.nrows];
        let mut row_dual = vec![0.0; self.nrows];
        unsafe {
            Highs_getSolution(
                self.ptr,
                col_value.as_mut_ptr(),
                col_dual.as_mut_ptr(),
                row_value.as_mut_ptr(),
                row_dual.as_mut_ptr(),
            );
        }
        (col_value, col_dual, row_dual)
    }

    fn objective(&self) -> f64 {
        unsafe { Highs_getObjectiveValue(self.ptr) }
    }

    fn num_cols(&self) -> usize {
        self.ncols
    }

    fn num_rows(&self) -> usize {
        self.nrows
    }

    fn write_model(&mut self, path: &str) -> Result<(), LpError> {
        let p = CString::new(path).map_err(|e| LpError::Backend(e.to_string()))?;
        let st = unsafe { Highs_writeModel(self.ptr, p.as_ptr()) };
        Self::check(st, "writeModel")
    }
}
