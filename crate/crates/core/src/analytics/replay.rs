use crate::book::BookState;
use crate::feed::EventStream;

use super::{AnalyticsError, Result, Window};

/// Steps a book forward through a stream in time order.
pub struct Replayer<'a> {
    stream: &'a EventStream,
    book: BookState,
    next: usize,
}

impl<'a> Replayer<'a> {
    pub fn new(stream: &'a EventStream) -> Self {
        Self {
            stream,
            book: BookState::new(),
            next: 0,
        }
    }

    pub fn book(&self) -> &BookState {
        &self.book
    }

    /// Timestamp of the next unapplied event.
    pub fn peek_time(&self) -> Option<i64> {
        self.stream.events.get(self.next).map(|e| e.timestamp_ms)
    }

    /// Applies every event with `timestamp_ms <= t`.
    pub fn advance_to(&mut self, t: i64) -> Result<()> {
        while let Some(e) = self.stream.events.get(self.next) {
            if e.timestamp_ms > t {
                break;
            }
            self.book
                .apply_event(e)
                .map_err(|source| AnalyticsError::Integrity {
                    index: self.next,
                    source,
                })?;
            self.next += 1;
        }
        Ok(())
    }
}

/// Calls `f(book, start, end)` for every maximal interval inside `window`
/// during which the book is constant. The book passed is the state after all
/// events stamped `<= start`.
pub fn for_each_segment<F>(stream: &EventStream, window: Window, mut f: F) -> Result<()>
where
    F: FnMut(&BookState, i64, i64),
{
    let mut replay = Replayer::new(stream);
    replay.advance_to(window.open_ms)?;
    let mut start = window.open_ms;
    while start < window.close_ms {
        let end = replay
            .peek_time()
            .map_or(window.close_ms, |t| t.min(window.close_ms));
        if end > start {
            f(replay.book(), start, end);
        }
        if end >= window.close_ms {
            break;
        }
        replay.advance_to(end)?;
        start = end;
    }
    Ok(())
}
