use crate::corpus::TweetRecord;

pub(crate) fn tweet(id: &str, user: &str, hashtags: &[&str]) -> TweetRecord {
    TweetRecord {
        tweet_id: id.into(),
        user_id: user.into(),
        screen_name: String::new(),
        text: String::new(),
        hashtags: hashtags.iter().map(|s| s.to_string()).collect(),
        retweeted_user_id: None,
        in_reply_to_user_id: None,
        mentioned_user_ids: vec![],
        timestamp: None,
    }
}

pub(crate) fn retweet(id: &str, user: &str, of: &str) -> TweetRecord {
    TweetRecord {
        retweeted_user_id: Some(of.into()),
        ..tweet(id, user, &[])
    }
}

pub(crate) fn mention(id: &str, user: &str, targets: &[&str]) -> TweetRecord {
    TweetRecord {
        mentioned_user_ids: targets.iter().map(|s| s.to_string()).collect(),
        ..tweet(id, user, &[])
    }
}

pub(crate) fn reply(id: &str, user: &str, to: &str) -> TweetRecord {
    TweetRecord {
        in_reply_to_user_id: Some(to.into()),
        ..tweet(id, user, &[])
    }
}
