use chrono::{NaiveDate, NaiveDateTime, NaiveTime, Timelike};

use super::{Dataset, PostRecord, TimeSlot};

/// Maps a wall-clock time to its slot using half-open intervals:
/// `[05,12)` breakfast, `[12,18)` lunch, `[18,24) ∪ [00,02)` dinner and
/// `[02,05)` unassigned.
pub fn assign_time_slot(time: NaiveTime) -> TimeSlot {
    match time.hour() {
        5..=11 => TimeSlot::Breakfast,
        12..=17 => TimeSlot::Lunch,
        18..=23 | 0..=1 => TimeSlot::Dinner,
        _ => TimeSlot::Unassigned,
    }
}

/// Slot and the calendar day the post counts toward. Dinner posts before
/// 02:00 belong to the previous evening.
pub fn activity_day(local: NaiveDateTime) -> (TimeSlot, NaiveDate) {
    let slot = assign_time_slot(local.time());
    let day = if slot == TimeSlot::Dinner && local.hour() < 2 {
        local.date().pred_opt().expect("date in range")
    } else {
        local.date()
    };
    (slot, day)
}

/// Posts of a dataset split by time slot.
#[derive(Debug, Default)]
pub struct SlotPartition<'a> {
    pub breakfast: Vec<&'a PostRecord>,
    pub lunch: Vec<&'a PostRecord>,
    pub dinner: Vec<&'a PostRecord>,
    pub unassigned: Vec<&'a PostRecord>,
}

impl<'a> SlotPartition<'a> {
    pub fn get(&self, slot: TimeSlot) -> &[&'a PostRecord] {
        match slot {
            TimeSlot::Breakfast => &self.breakfast,
            TimeSlot::Lunch => &self.lunch,
            TimeSlot::Dinner => &self.dinner,
            TimeSlot::Unassigned => &self.unassigned,
        }
    }

    pub fn total(&self) -> usize {
        self.breakfast.len() + self.lunch.len() + self.dinner.len() + self.unassigned.len()
    }
}

pub fn stratify(dataset: &Dataset) -> SlotPartition<'_> {
    let mut part = SlotPartition::default();
    for post in &dataset.posts {
        match post.slot {
            TimeSlot::Breakfast => part.breakfast.push(post),
            TimeSlot::Lunch => part.lunch.push(post),
            TimeSlot::Dinner => part.dinner.push(post),
            TimeSlot::Unassigned => part.unassigned.push(post),
        }
    }
    part
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(h: u32, m: u32) -> NaiveTime {
        NaiveTime::from_hms_opt(h, m, 0).unwrap()
    }

    #[test]
    fn slot_examples() {
        assert_eq!(assign_time_slot(t(8, 30)), TimeSlot::Breakfast);
        assert_eq!(assign_time_slot(t(12, 0)), TimeSlot::Lunch);
        assert_eq!(assign_time_slot(t(1, 30)), TimeSlot::Dinner);
        assert_eq!(assign_time_slot(t(3, 0)), TimeSlot::Unassigned);
    }

    #[test]
    fn boundaries_belong_to_later_slot() {
        assert_eq!(assign_time_slot(t(4, 59)), TimeSlot::Unassigned);
        assert_eq!(assign_time_slot(t(5, 0)), TimeSlot::Breakfast);
        assert_eq!(assign_time_slot(t(11, 59)), TimeSlot::Breakfast);
        assert_eq!(assign_time_slot(t(17, 59)), TimeSlot::Lunch);
        assert_eq!(assign_time_slot(t(18, 0)), TimeSlot::Dinner);
        assert_eq!(assign_time_slot(t(0, 0)), TimeSlot::Dinner);
        assert_eq!(assign_time_slot(t(1, 59)), TimeSlot::Dinner);
        assert_eq!(assign_time_slot(t(2, 0)), TimeSlot::Unassigned);
        let late = NaiveTime::from_hms_nano_opt(1, 59, 59, 999_999_999).unwrap();
        assert_eq!(assign_time_slot(late), TimeSlot::Dinner);
    }

    #[test]
    fn after_midnight_dinner_counts_for_previous_day() {
        let d = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap();
        let (slot, day) = activity_day(d.and_time(t(1, 30)));
        assert_eq!(slot, TimeSlot::Dinner);
        assert_eq!(day, NaiveDate::from_ymd_opt(2018, 12, 31).unwrap());
        assert_eq!(activity_day(d.and_time(t(23, 0))), (TimeSlot::Dinner, d));
        assert_eq!(
            activity_day(d.and_time(t(2, 30))),
            (TimeSlot::Unassigned, d)
        );
    }

    #[test]
    fn every_minute_maps_to_exactly_one_slot() {
        let mut minutes = [0usize; 4];
        for h in 0..24 {
            for m in 0..60 {
                minutes[assign_time_slot(t(h, m)) as usize] += 1;
            }
        }
        assert_eq!(minutes, [7 * 60, 6 * 60, 8 * 60, 3 * 60]);
        assert_eq!(minutes.iter().sum::<usize>(), 24 * 60);
    }
}
